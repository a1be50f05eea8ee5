// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "oracles.hpp"
#include "scripted_env.hpp"
#include "fixtures.hpp"

#include "gennav/cli/app.hpp"
#include "gennav/contamination.hpp"
#include "gennav/datagen.hpp"
#include "gennav/env.hpp"
#include "gennav/parallel.hpp"
#include "gennav/policy.hpp"
#include "gennav/reward.hpp"
#include "gennav/rng.hpp"
#include "gennav/serialize.hpp"
#include "gennav/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gennav;
namespace fs = std::filesystem;

namespace
{

/// Collects failed checks for one criterion.
class Checks
{
public:
    void expect(bool ok, const std::string& what)
    {
        ++_count;
        if (!ok && _failures.size() < 5)
            _failures.push_back(what);
        if (!ok)
            ++_failed;
    }
    void note(const std::string& text) { _notes += (_notes.empty() ? "" : "; ") + text; }

    bool passed() const { return _failed == 0; }
    std::string summary() const
    {
        auto out = std::to_string(_count - _failed) + "/" + std::to_string(_count) + " checks";
        if (!_notes.empty())
            out += "; " + _notes;
        for (auto const& f: _failures)
            out += "\n    failed: " + f;
        return out;
    }

private:
    std::size_t _count = 0;
    std::size_t _failed = 0;
    std::vector<std::string> _failures;
    std::string _notes;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof(buf), format, a, b, c);
    return buf;
}

reward::RewardWeights weights(double alpha, double beta, int t_max)
{
    auto w = reward::RewardWeights {};
    w.alpha = alpha;
    w.beta = beta;
    w.gamma = 0.0;
    w.t_max = t_max;
    return w;
}

double reward_of(const std::vector<double>& scores, const reward::RewardWeights& w)
{
    return reward::pre_grpo_reward(reward::compute_stats(scores, true, w), w);
}

std::vector<double> random_scores(Rng& rng, int length)
{
    auto scores = std::vector<double> {};
    for (int i = 0; i < length; ++i)
        scores.push_back(5.0 * rng.uniform());
    return scores;
}

void a1(Checks& c)
{
    struct Case
    {
        std::vector<double> scores;
        double alpha;
        double beta;
        double expected;
    };
    auto const cases = std::vector<Case> {
        {{4.80}, 0.25, 0.025, 1.2000},
        {{4.50, 4.80}, 0.25, 0.025, 1.1875},
        {{3.00, 4.00, 4.80}, 0.25, 0.025, 1.1750},
        {{3.00, 4.80, 4.00}, 0.25, 0.025, 1.1350},
        {{4.83}, 0.25, 0.05, 1.2075},
        {{4.0, 4.6, 5.0}, 0.25, 0.05, 1.2000},
        {{3.00, 4.50, 4.70}, 4.0, 0.025, 4.6750},
        {{3.00, 4.90, 4.64}, 4.0, 0.025, 4.6670},
    };
    auto worst = 0.0;
    for (auto const& k: cases)
    {
        auto const got = reward_of(k.scores, weights(k.alpha, k.beta, 3));
        worst = std::max(worst, std::abs(got - k.expected));
        c.expect(std::abs(got - k.expected) <= 1e-9, fmt("expected %.4f got %.12f", k.expected, got));
    }
    c.note(fmt("max error %.2e", worst));
}

void a2(Checks& c)
{
    auto rng = Rng(20240601);
    auto worst = 0.0;
    for (int trial = 0; trial < 100000; ++trial)
    {
        auto const tmax = 1 + static_cast<int>(rng.next_u64() % 5);
        auto const n = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(tmax));
        auto const w = weights(4.0 * rng.uniform(), 0.2 * rng.uniform(), tmax);
        auto const s = reward::compute_stats(random_scores(rng, n), true, w);
        auto const lhs = s.peak + w.alpha * s.retention;
        auto const rhs = (1 + w.alpha) * s.peak - w.alpha * (s.peak - s.retention);
        worst = std::max(worst, std::abs(lhs - rhs));
        auto const r = reward::pre_grpo_reward(s, w);
        worst = std::max(worst, std::abs(r - (rhs - w.beta * s.efficiency)));
    }
    c.expect(worst <= 1e-12, fmt("identity error %.3e", worst));
    c.note(fmt("identity max error %.2e over 1e5 trajectories", worst));

    for (int trial = 0; trial < 2000; ++trial)
    {
        auto const n = 3 + static_cast<int>(rng.next_u64() % 4);
        auto const w = weights(0.25, 0.025, n);
        auto scores = random_scores(rng, n);
        auto const base = reward_of(scores, w);
        auto const peakAt = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end() - 1)
                                                     - scores.begin());
        auto movable = std::vector<std::size_t> {};
        for (std::size_t i = 0; i + 1 < scores.size(); ++i)
            if (i != peakAt)
                movable.push_back(i);
        auto shuffled = scores;
        for (std::size_t i = movable.size(); i > 1; --i)
            std::swap(shuffled[movable[i - 1]], shuffled[movable[rng.next_u64() % i]]);
        c.expect(reward_of(shuffled, w) == base, "permutation changed the reward");
    }

    for (int trial = 0; trial < 2000; ++trial)
    {
        auto const w = weights(4.0 * rng.uniform(), 0.01 + 0.2 * rng.uniform(), 6);
        auto const peak = 2.5 + 2.5 * rng.uniform();
        auto const final = peak * rng.uniform();
        auto previous = reward_of({peak, final}, w);
        for (int t = 3; t <= 6; ++t)
        {
            auto scores = std::vector<double> {peak};
            for (int i = 2; i < t; ++i)
                scores.push_back(final * rng.uniform());
            scores.push_back(final);
            auto const r = reward_of(scores, w);
            c.expect(r < previous, "reward did not decrease with T");
            previous = r;
        }
    }
}

void a3(Checks& c)
{
    auto rng = Rng(33);
    auto worstMean = 0.0;
    auto worstStd = 0.0;
    auto worstShift = 0.0;
    for (int trial = 0; trial < 10000; ++trial)
    {
        auto const k = 2 + static_cast<std::size_t>(rng.next_u64() % 15);
        auto rewards = std::vector<double> {};
        for (std::size_t i = 0; i < k; ++i)
            rewards.push_back(rng.normal(1.0, 0.3));
        auto const a = reward::group_advantages(rewards, 1e-8);
        auto const mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(k);
        auto var = 0.0;
        for (auto x: a)
            var += (x - mean) * (x - mean);
        worstMean = std::max(worstMean, std::abs(mean));
        worstStd = std::max(worstStd, std::abs(std::sqrt(var / static_cast<double>(k)) - 1.0));

        auto shifted = rewards;
        auto const shift = rng.normal(0.0, 3.0);
        for (auto& r: shifted)
            r += shift;
        auto const b = reward::group_advantages(shifted, 1e-8);
        for (std::size_t i = 0; i < k; ++i)
            worstShift = std::max(worstShift, std::abs(a[i] - b[i]));
    }
    c.expect(worstMean <= 1e-9, fmt("mean %.3e", worstMean));
    c.expect(worstStd <= 1e-4, fmt("std deviation from 1 %.3e", worstStd));
    c.expect(worstShift <= 1e-9, fmt("shift change %.3e", worstShift));

    auto const three = reward::group_advantages(std::vector {1.0, 2.0, 3.0}, 1e-8);
    auto const oracle = testing::advantages_by_hand({1.0, 2.0, 3.0}, 1e-8);
    c.expect(std::abs(three[0] + 1.2247) <= 1e-4 && std::abs(three[1]) <= 1e-9 && std::abs(three[2] - 1.2247) <= 1e-4,
             fmt("[1,2,3] -> %.6f %.6f %.6f", three[0], three[1], three[2]));
    for (std::size_t i = 0; i < 3; ++i)
        c.expect(std::abs(three[i] - oracle[i]) <= 1e-4, "hand oracle mismatch");
    c.note(fmt("[1,2,3] -> %.4f %.4f %.4f", three[0], three[1], three[2]));
}

void a4(Checks& c)
{
    constexpr double h = 1e-5;
    auto rng = Rng(4);
    auto worst = 0.0;
    for (int draw = 0; draw < 100; ++draw)
    {
        auto params = policy::PolicyParams {};
        for (int r = 0; r < 3; ++r)
            for (int col = 0; col < 5; ++col)
                params.weights(r, col) = rng.normal(0.0, 2.0);
        auto const f = policy::StateFeatures {.current_score_norm = rng.uniform(),
                                              .turn_frac = rng.uniform(),
                                              .score_delta = rng.uniform() - 0.5,
                                              .prompt_difficulty = rng.uniform(),
                                              .bias = 1.0};
        auto const t = 2 + static_cast<int>(rng.next_u64() % 3);
        auto const chosen = kAllActions[rng.next_u64() % kNumActions];
        auto const analytic = policy::log_prob_gradient(params, f, t, chosen);
        auto numeric = policy::WeightMatrix();
        for (int r = 0; r < 3; ++r)
            for (int col = 0; col < 5; ++col)
            {
                auto plus = params;
                auto minus = params;
                plus.weights(r, col) += h;
                minus.weights(r, col) -= h;
                numeric(r, col) = (policy::log_prob(plus, f, t, chosen) - policy::log_prob(minus, f, t, chosen))
                                  / (2.0 * h);
            }
        auto const rel = (analytic - numeric).norm() / std::max(analytic.norm(), numeric.norm());
        worst = std::max(worst, rel);
        c.expect(rel <= 1e-5, fmt("relative error %.3e", rel));
    }
    c.note(fmt("max relative error %.2e", worst));
}

datagen::BranchLog construct(std::vector<std::vector<double>> table, int k)
{
    auto const environment = testing::ScriptedEnvironment::from_table(std::move(table));
    return datagen::branch_and_select(datagen::SimProposer {}, environment, testing::test_prompt(), k, 3, 4.5, Rng(1));
}

void a5(Checks& c)
{
    using datagen::StopReason;
    auto const threshold = construct({{4.6, 3.0}}, 2);
    c.expect(threshold.stop_reason == StopReason::Threshold && threshold.path_scores() == std::vector {4.6},
             "threshold stop");
    auto const exact = construct({{3.0, 4.5}}, 2);
    c.expect(exact.stop_reason == StopReason::Threshold && exact.tree[0].selected == 1, "threshold at exactly 4.5");
    auto const flat = construct({{4.0, 3.0}, {3.9, 3.5}}, 2);
    c.expect(flat.stop_reason == StopReason::NoImprovement && flat.tree.size() == 2
                 && flat.path_scores() == std::vector {4.0},
             "no-improvement stop");
    auto const budget = construct({{3.0}, {3.5}, {4.0}}, 1);
    c.expect(budget.stop_reason == StopReason::Budget && budget.tree.size() == 3
                 && budget.path_scores() == std::vector {3.0, 3.5, 4.0},
             "budget stop");

    c.expect(!datagen::check_scores(std::vector {3.0, 4.0, 4.8}).has_value(), "[3.0,4.0,4.8] kept");
    c.expect(datagen::check_scores(std::vector {3.0, 4.8, 4.0}).has_value(), "[3.0,4.8,4.0] rejected");
    c.expect(datagen::check_scores(std::vector {3.0, 3.0, 4.8}).has_value(), "[3.0,3.0,4.8] rejected");
}

struct VariantResult
{
    double gap = 0.0;
    double turns = 0.0;
    double peak = 0.0;
    std::vector<double> curve;
};

VariantResult train_and_evaluate(reward::RewardVariant variant, int workers)
{
    auto const environment = env::SimEnvironment(env::SimEnvConfig {});
    auto const pool = env::synthetic_prompt_pool(1000, 99);
    auto const evalPool = env::synthetic_prompt_pool(1000, 12345);
    constexpr int kSeeds = 5;
    auto result = VariantResult {};
    for (int s = 0; s < kSeeds; ++s)
    {
        auto config = trainer::TrainConfig {};
        config.reward_variant = variant;
        config.seed = static_cast<std::uint64_t>(s + 1);
        config.group_size = 8;
        config.steps = 300;
        config.weights.t_max = 3;
        config.workers = workers;
        auto const trained = trainer::train(config, environment, pool);
        auto const seeds = std::vector<std::uint64_t> {1000u + static_cast<std::uint64_t>(s)};
        auto const report = trainer::evaluate(policy::SoftmaxNavigator(trained.params), environment, evalPool, 3,
                                              seeds, workers);
        result.gap += report.mean_gap / kSeeds;
        result.turns += report.avg_turns / kSeeds;
        result.peak += report.mean_peak / kSeeds;
        if (result.curve.size() < report.per_turn.size())
            result.curve.resize(report.per_turn.size(), 0.0);
        for (auto const& p: report.per_turn)
            result.curve[static_cast<std::size_t>(p.turn - 1)] += p.mean / kSeeds;
    }
    return result;
}

void a6(Checks& c)
{
    auto const workers = resolve_workers(0);
    auto const pre = train_and_evaluate(reward::RewardVariant::PreGrpo, workers);
    auto const best = train_and_evaluate(reward::RewardVariant::BestOnly, workers);
    auto const reduction = best.gap > 0.0 ? 1.0 - pre.gap / best.gap : 0.0;
    c.expect(reduction >= 0.5, fmt("gap reduction %.3f (PRE %.4f, BEST %.4f)", reduction, pre.gap, best.gap));
    c.expect(pre.turns < best.turns, fmt("turns PRE %.4f vs BEST %.4f", pre.turns, best.turns));
    c.expect(std::abs(pre.peak - best.peak) <= 0.02, fmt("peak PRE %.4f vs BEST %.4f", pre.peak, best.peak));
    auto monotone = !pre.curve.empty();
    for (std::size_t i = 1; i < pre.curve.size(); ++i)
        monotone = monotone && pre.curve[i] >= pre.curve[i - 1];
    auto curveText = std::string {};
    for (auto v: pre.curve)
        curveText += (curveText.empty() ? "" : " ") + fmt("%.3f", v);
    c.expect(monotone, "per-turn curve " + curveText);
    c.note(fmt("gap PRE %.4f BEST %.4f (-%.1f%%)", pre.gap, best.gap, 100.0 * reduction));
    c.note(fmt("turns %.3f vs %.3f", pre.turns, best.turns));
    c.note(fmt("peak %.4f vs %.4f", pre.peak, best.peak));
    c.note("PRE per-turn " + curveText);
}

void a7(Checks& c)
{
    auto const environment = env::SimEnvironment(env::SimEnvConfig {});
    auto const pool = env::synthetic_prompt_pool(500, 7);
    auto const seeds = std::vector<std::uint64_t> {1, 2, 3};
    auto const workers = resolve_workers(0);

    auto delivered = [&](policy::Workflow w) {
        return trainer::evaluate(policy::FixedWorkflowNavigator(w), environment, pool, 3, seeds, workers).mean_best;
    };
    auto const oneShot = delivered(policy::Workflow::OneShot);
    auto const refine = delivered(policy::Workflow::RefineOnly);
    auto const regenerate = delivered(policy::Workflow::RegenerateOnly);

    auto scores = std::vector<double>(seeds.size() * pool.size());
    parallel_for(scores.size(), workers, [&](std::size_t i) {
        auto const seed = seeds[i / pool.size()];
        auto const p = i % pool.size();
        scores[i] = select_output(policy::preference_reference(environment, pool[p], 3, Rng(seed).split(p)).trajectory)
                        .score;
    });
    auto const preference = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());

    c.expect(preference >= refine, fmt("preference %.4f < refine-only %.4f", preference, refine));
    c.expect(preference >= regenerate, fmt("preference %.4f < regenerate-only %.4f", preference, regenerate));
    c.expect(refine >= oneShot, fmt("refine-only %.4f < one-shot %.4f", refine, oneShot));
    c.expect(regenerate >= oneShot, fmt("regenerate-only %.4f < one-shot %.4f", regenerate, oneShot));
    c.note(fmt("preference %.4f, refine-only %.4f, regenerate-only %.4f", preference, refine, regenerate));
    c.note(fmt("one-shot %.4f", oneShot));
}

void a8(Checks& c)
{
    auto pool = std::vector<std::string> {};
    for (auto const& p: env::synthetic_prompt_pool(1000, 99))
        pool.push_back(p.text);
    auto rng = Rng(8);
    for (int i = 0; i < 200; ++i)
    {
        auto text = std::string {};
        auto const length = 8 + static_cast<int>(rng.next_u64() % 20);
        for (int w = 0; w < length; ++w)
            text += (text.empty() ? "" : " ") + std::string("word") + std::to_string(rng.next_u64() % 300);
        pool.push_back(text);
    }
    auto const index = contamination::PoolIndex(pool);
    auto const workers = resolve_workers(0);
    auto const self = contamination::audit(pool, index, contamination::AuditOptions {.workers = workers});

    auto long13 = std::size_t {0};
    auto long8 = std::size_t {0};
    for (std::size_t i = 0; i < pool.size(); ++i)
    {
        auto const tokens = contamination::tokenize(pool[i]).size();
        auto const& e = self.entries[i];
        if (tokens >= 13)
        {
            ++long13;
            c.expect(e.collision13, "self-audit missed a 13-gram collision: " + pool[i]);
        }
        if (tokens >= 8)
        {
            ++long8;
            c.expect(e.flag8 && e.containment8 && *e.containment8 >= 0.70,
                     "self-audit 8-gram containment below 0.70: " + pool[i]);
        }
    }
    c.expect(long13 > 0 && long8 > 0, "pool has no long prompts");

    auto vocabulary = std::set<std::string> {};
    for (auto const& text: pool)
        for (auto& token: contamination::tokenize(text))
            vocabulary.insert(token);
    auto disjoint = std::vector<std::string> {};
    for (int i = 0; i < 300; ++i)
    {
        auto text = std::string {};
        auto const length = 5 + static_cast<int>(rng.next_u64() % 25);
        for (int w = 0; w < length; ++w)
            text += (text.empty() ? "" : " ") + std::string("fresh") + std::to_string(rng.next_u64() % 1000);
        disjoint.push_back(text);
    }
    for (auto const& text: disjoint)
        for (auto const& token: contamination::tokenize(text))
            c.expect(!vocabulary.contains(token), "generated corpus shares token " + token);
    auto const clean = contamination::audit(disjoint, index, contamination::AuditOptions {.workers = workers});
    auto flags = std::size_t {0};
    for (auto const& e: clean.entries)
        flags += (e.flag8 ? 1 : 0) + (e.collision13 ? 1 : 0) + (e.jaccard5 > 0.0 ? 1 : 0)
                 + (e.containment5.value_or(0.0) > 0.0 ? 1 : 0) + (e.containment8.value_or(0.0) > 0.0 ? 1 : 0);
    c.expect(flags == 0, "disjoint corpus raised " + std::to_string(flags) + " lexical flags");

    auto words = [](int from, int to) {
        auto out = std::string {};
        for (int i = from; i <= to; ++i)
            out += (out.empty() ? "" : " ") + std::string("b") + std::to_string(i);
        return out;
    };
    auto const boundaryPool = contamination::PoolIndex({words(1, 14)});
    auto const boundary = contamination::flag_8gram(words(1, 17), boundaryPool);
    c.expect(boundary.containment && std::abs(*boundary.containment - 0.70) <= 1e-12 && boundary.flagged,
             "0.70 boundary case did not flag");
    auto const below = contamination::flag_8gram(words(1, 17), contamination::PoolIndex({words(1, 13)}));
    c.expect(!below.flagged, "0.60 case flagged");
    c.note("self-audit " + std::to_string(long13) + " prompts >=13 tokens, " + std::to_string(long8)
           + " >=8 tokens; disjoint corpus " + std::to_string(disjoint.size()) + " prompts");
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr)
{
    args.insert(args.begin(), "gennav");
    auto argv = std::vector<const char*> {};
    for (auto const& a: args)
        argv.push_back(a.c_str());
    auto out = std::ostringstream {};
    auto err = std::ostringstream {};
    auto const code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text)
        *out_text = out.str() + err.str();
    return code;
}

void a9(Checks& c)
{
    auto const root = fs::temp_directory_path() / "gennav_acceptance_a9";
    fs::remove_all(root);
    fs::create_directories(root);
    auto const dir = [&](const char* name) { return (root / name).string(); };

    c.expect(run_cli({"train", "--steps", "20", "--k", "4", "--n-prompts", "50", "--seed", "5", "--out", dir("train")})
                 == 0,
             "train run failed");
    c.expect(run_cli({"simulate", "--policy", "softmax", "--params", dir("train") + "/params.txt", "--n-prompts", "200",
                      "--seed", "6", "--out", dir("sim")})
                 == 0,
             "simulate run failed");
    c.expect(run_cli({"simulate", "--policy", "preference", "--n-prompts", "100", "--seed", "7", "--out", dir("pref")})
                 == 0,
             "preference run failed");

    for (auto const* run: {"train", "sim", "pref"})
    {
        auto text = std::string {};
        auto const manifest = dir(run) + "/manifest.json";
        auto const code = run_cli({"replay", "--manifest", manifest, "--out", dir(run) + "_replay"}, &text);
        c.expect(code == 0, std::string(run) + " replay: " + text);
        auto const recorded = io::Json::parse(io::read_text_file(manifest));
        for (auto const& entry: recorded.at("outputs"))
        {
            auto const name = entry.at("name").get<std::string>();
            c.expect(io::read_text_file(dir(run) + "/" + name) == io::read_text_file(dir(run) + "_replay/" + name),
                     std::string(run) + "/" + name + " differs after replay");
        }
    }
    fs::remove_all(root);
}

} // namespace

int main()
{
    struct Criterion
    {
        const char* id;
        const char* title;
        std::function<void(Checks&)> body;
    };
    auto const criteria = std::vector<Criterion> {
        {"A1", "worked reward comparisons", a1},
        {"A2", "decomposition, permutation invariance, length penalty", a2},
        {"A3", "group advantages", a3},
        {"A4", "log-prob gradient vs finite differences", a4},
        {"A5", "branch-and-select stops and filter", a5},
        {"A6", "PRE-GRPO vs BEST_ONLY training", a6},
        {"A7", "preference reference vs fixed workflows", a7},
        {"A8", "contamination audit", a8},
        {"A9", "replay determinism", a9},
    };
    auto failed = 0;
    for (auto const& criterion: criteria)
    {
        auto checks = Checks {};
        auto const start = std::chrono::steady_clock::now();
        try
        {
            criterion.body(checks);
        }
        catch (const std::exception& e)
        {
            checks.expect(false, std::string("exception: ") + e.what());
        }
        auto const seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s %s (%.1fs): %s\n", checks.passed() ? "PASS" : "FAIL", criterion.id, criterion.title,
                    seconds, checks.summary().c_str());
        std::fflush(stdout);
        if (!checks.passed())
            ++failed;
    }
    return failed == 0 ? 0 : 1;
}
