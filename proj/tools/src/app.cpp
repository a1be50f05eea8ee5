// SPDX-License-Identifier: Apache-2.0
#include "gennav/cli/app.hpp"

#include "gennav/contamination.hpp"
#include "gennav/error.hpp"
#include "gennav/parallel.hpp"
#include "gennav/serialize.hpp"
#include "gennav/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <deque>
#include <sstream>

namespace gennav::cli
{

namespace fs = std::filesystem;

namespace
{

constexpr auto kDefaultReportName = "contamination_report.json";

std::string fixed(double value, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

const std::string* find_input(const RunSpec& spec, const std::string& role)
{
    auto const it = spec.inputs.find(role);
    return it == spec.inputs.end() ? nullptr : &it->second;
}

const std::string& require_input(const RunSpec& spec, const std::string& role)
{
    auto const* path = find_input(spec, role);
    if (!path)
        throw InputError("missing required input '" + role + "'");
    return *path;
}

std::vector<PromptSpec> prompt_pool(const RunSpec& spec)
{
    if (auto const* path = find_input(spec, "prompts"))
    {
        auto pool = env::load_prompt_pool(*path);
        if (pool.empty())
            throw InputError(*path + ": empty prompt pool");
        return pool;
    }
    auto const n = get_int(spec.settings, "n_prompts");
    if (n < 1)
        throw InputError("n_prompts must be >= 1");
    return env::synthetic_prompt_pool(static_cast<std::size_t>(n), get_u64(spec.settings, "seed"));
}

int budget(const RunSpec& spec)
{
    return reward_weights(spec.settings).t_max;
}

std::string jsonl(const std::vector<std::string>& lines)
{
    auto text = std::string {};
    for (auto const& line: lines)
        text.append(line).append("\n");
    return text;
}

std::string trajectories_jsonl(std::span<const Trajectory> logs)
{
    auto text = std::string {};
    for (auto const& trajectory: logs)
        text.append(io::encode_trajectory(trajectory)).append("\n");
    return text;
}

std::unique_ptr<env::Navigator> make_navigator(const RunSpec& spec, const std::string& kind)
{
    if (kind == "softmax")
    {
        auto params = find_input(spec, "params") ? policy::load_params_file(*find_input(spec, "params"))
                                                 : trainer::initial_params(train_config(spec.settings));
        return std::make_unique<policy::SoftmaxNavigator>(std::move(params));
    }
    if (kind == "heuristic")
        return std::make_unique<policy::HeuristicNavigator>(thresholds(spec.settings));
    if (kind == "one-shot")
        return std::make_unique<policy::FixedWorkflowNavigator>(policy::Workflow::OneShot);
    if (kind == "refine-only")
        return std::make_unique<policy::FixedWorkflowNavigator>(policy::Workflow::RefineOnly);
    if (kind == "regenerate-only")
        return std::make_unique<policy::FixedWorkflowNavigator>(policy::Workflow::RegenerateOnly);
    throw InputError("unknown policy.kind '" + kind
                     + "' (softmax|heuristic|one-shot|refine-only|regenerate-only|preference)");
}

std::vector<OutputFile> run_simulate(const RunSpec& spec, std::ostream& log)
{
    auto const pool = prompt_pool(spec);
    auto const environment = make_environment(spec.settings);
    auto const tMax = budget(spec);
    auto const seed = get_u64(spec.settings, "seed");
    auto const workers = get_int(spec.settings, "workers");
    auto const kind = get_string(spec.settings, "policy.kind");

    auto logs = std::vector<Trajectory> {};
    auto summary = io::Json::object();
    summary["policy"] = kind;
    if (kind == "preference")
    {
        auto const margin = get_double(spec.settings, "policy.tie_margin");
        auto rollouts = std::vector<policy::PreferenceRollout>(pool.size());
        parallel_for(pool.size(), workers, [&](std::size_t i) {
            rollouts[i] = policy::preference_reference(*environment, pool[i], tMax, Rng(seed).split(i), margin);
        });
        auto counts = std::map<std::string, std::size_t> {{"REFINE", 0}, {"REGENERATE", 0}, {"TIE", 0}};
        auto total = std::size_t {0};
        for (auto& rollout: rollouts)
        {
            for (auto const outcome: rollout.outcomes)
            {
                ++counts[std::string(policy::to_string(outcome))];
                ++total;
            }
            logs.push_back(std::move(rollout.trajectory));
        }
        auto shares = io::Json::object();
        for (auto const& [name, count]: counts)
            shares[name] = total ? static_cast<double>(count) / static_cast<double>(total) : 0.0;
        summary["branch_outcomes"] = std::move(shares);
    }
    else
    {
        auto const navigator = make_navigator(spec, kind);
        auto const seeds = std::vector<std::uint64_t> {seed};
        trainer::evaluate(*navigator, *environment, pool, tMax, seeds, workers, &logs);
    }
    summary["evaluation"] = io::Json::parse(trainer::encode_eval_report(trainer::summarize(logs)));

    auto const report = trainer::summarize(logs);
    log << "simulate: " << logs.size() << " episodes, mean best " << fixed(report.mean_best, 4) << ", avg turns "
        << fixed(report.avg_turns, 3) << "\n";
    return {OutputFile {"trajectories.jsonl", trajectories_jsonl(logs)},
            OutputFile {"summary.json", summary.dump(2) + "\n"}};
}

std::vector<OutputFile> run_train(const RunSpec& spec, std::ostream& log)
{
    auto const config = train_config(spec.settings);
    auto const pool = prompt_pool(spec);
    auto const environment = make_environment(spec.settings);
    auto start = std::optional<policy::PolicyParams> {};
    if (auto const* path = find_input(spec, "init_params"))
        start = policy::load_params_file(*path);

    auto const result = trainer::train(config, *environment, pool, start);

    auto params = std::ostringstream {};
    policy::save_params(result.params, params);
    auto curve = std::vector<std::string> {};
    for (auto const& record: result.curve)
        curve.push_back(trainer::encode_curve_record(record));

    log << "train: " << config.steps << " steps, variant " << reward::to_string(config.reward_variant);
    if (!result.curve.empty())
        log << ", last mean reward " << fixed(result.curve.back().mean_reward, 4) << ", last mean turns "
            << fixed(result.curve.back().mean_turns, 3);
    log << "\n";
    return {OutputFile {"params.txt", params.str()}, OutputFile {"curve.jsonl", jsonl(curve)}};
}

std::vector<OutputFile> run_construct_data(const RunSpec& spec, std::ostream& log)
{
    auto const pool = prompt_pool(spec);
    auto const environment = make_environment(spec.settings);
    auto const tMax = budget(spec);
    auto const k = get_int(spec.settings, "datagen.k");
    auto const rhoThr = get_double(spec.settings, "datagen.rho_thr");
    auto const minPeak = get_double(spec.settings, "datagen.min_peak");
    auto const proposer = datagen::SimProposer(get_double(spec.settings, "datagen.refine_share"));
    auto const seed = get_u64(spec.settings, "seed");

    auto logs = std::vector<datagen::BranchLog>(pool.size());
    parallel_for(pool.size(), get_int(spec.settings, "workers"), [&](std::size_t i) {
        logs[i] = datagen::branch_and_select(proposer, *environment, pool[i], k, tMax, rhoThr, Rng(seed).split(i));
    });
    auto const filtered = datagen::filter_trajectories(logs, minPeak);

    auto branchLines = std::vector<std::string> {};
    auto pathLines = std::vector<std::string> {};
    for (auto const& entry: logs)
    {
        branchLines.push_back(datagen::encode_branch_log(entry));
        pathLines.push_back(io::encode_trajectory(entry.path_trajectory()));
    }
    auto conversationLines = std::vector<std::string> {};
    for (auto const& record: datagen::export_conversational(filtered.kept))
        conversationLines.push_back(datagen::encode_conversation(record));

    auto stats = io::Json::object();
    stats["total"] = logs.size();
    stats["kept"] = filtered.stats.kept;
    stats["rejected_not_strictly_increasing"] = filtered.stats.not_increasing;
    stats["rejected_peak_too_low"] = filtered.stats.peak_too_low;
    auto rejected = io::Json::array();
    for (auto const& [id, rule]: filtered.rejected)
        rejected.push_back(io::Json {{"prompt_id", id}, {"rule", std::string(datagen::to_string(rule))}});
    stats["rejected"] = std::move(rejected);

    log << "construct-data: " << logs.size() << " prompts, kept " << filtered.stats.kept << "\n";
    return {OutputFile {"branch_logs.jsonl", jsonl(branchLines)},
            OutputFile {"selected_paths.jsonl", jsonl(pathLines)},
            OutputFile {"conversations.jsonl", jsonl(conversationLines)},
            OutputFile {"filter_stats.json", stats.dump(2) + "\n"}};
}

std::vector<OutputFile> run_audit(const RunSpec& spec, std::ostream& log)
{
    auto const bench = io::read_lines(require_input(spec, "bench"));
    auto const pool = contamination::PoolIndex(io::read_lines(require_input(spec, "pool")));

    auto const* benchVectorsPath = find_input(spec, "vectors_bench");
    auto const* poolVectorsPath = find_input(spec, "vectors_pool");
    if ((benchVectorsPath == nullptr) != (poolVectorsPath == nullptr))
        throw InputError("--vectors-bench and --vectors-pool must be given together");
    auto benchVectors = std::optional<contamination::Vectors> {};
    auto poolVectors = std::optional<contamination::Vectors> {};
    if (benchVectorsPath)
    {
        benchVectors = contamination::read_vectors(*benchVectorsPath);
        poolVectors = contamination::read_vectors(*poolVectorsPath);
    }

    auto options = contamination::AuditOptions {};
    options.containment_threshold = get_double(spec.settings, "contamination.threshold8");
    options.cosine_threshold = get_double(spec.settings, "contamination.cosine_threshold");
    options.workers = get_int(spec.settings, "workers");
    auto const report = contamination::audit(bench, pool, options, benchVectors ? &*benchVectors : nullptr,
                                             poolVectors ? &*poolVectors : nullptr);

    auto flagged8 = 0;
    auto collisions = 0;
    for (auto const& entry: report.entries)
    {
        flagged8 += entry.flag8;
        collisions += entry.collision13;
    }
    log << "audit-contamination: " << bench.size() << " benchmark prompts, " << flagged8 << " flagged by 8-gram, "
        << collisions << " with 13-gram collisions\n";
    auto const name = spec.output_name.empty() ? std::string(kDefaultReportName) : spec.output_name;
    return {OutputFile {name, contamination::audit_report_json(report, bench, pool)}};
}

std::vector<OutputFile> run_report(const RunSpec& spec, std::ostream& log)
{
    auto const& logsPath = require_input(spec, "logs");
    auto const logs = io::read_trajectories(logsPath);
    if (logs.empty())
        throw InputError(logsPath + ": no trajectories");

    auto const actions = metrics::action_distribution(logs);
    auto const curve = metrics::per_turn_curve(logs);
    auto const turns = metrics::avg_turns(logs);
    auto const bvf = metrics::best_vs_final(logs);
    auto const latency = metrics::latency_account(logs, cost_model(spec.settings));
    auto const stopThreshold = get_double(spec.settings, "report.stop_threshold");
    auto const stops = metrics::correct_stop_rate(logs, stopThreshold);

    auto outputs = std::vector<OutputFile> {};
    auto csv = std::string("action,count,share\n");
    for (auto const choice: kAllActions)
        csv += std::string(to_string(choice)) + "," + std::to_string(actions.counts[index_of(choice)]) + ","
               + fixed(actions.share(choice)) + "\n";
    outputs.push_back({"action_distribution.csv", csv});

    csv = "turn,mean_score,count\n";
    for (auto const& point: curve)
        csv += std::to_string(point.turn) + "," + fixed(point.mean) + "," + std::to_string(point.count) + "\n";
    outputs.push_back({"per_turn.csv", csv});

    outputs.push_back({"avg_turns.csv",
                       "episodes,avg_turns\n" + std::to_string(logs.size()) + "," + fixed(turns) + "\n"});
    outputs.push_back({"best_vs_final.csv", "mean_best,mean_final,delta\n" + fixed(bvf.mean_best) + ","
                                                + fixed(bvf.mean_final) + "," + fixed(bvf.delta) + "\n"});

    csv = "turn,seconds\n";
    for (std::size_t t = 0; t < latency.per_turn.size(); ++t)
        csv += std::to_string(t + 1) + "," + fixed(latency.per_turn[t]) + "\n";
    outputs.push_back({"latency.csv", csv});

    outputs.push_back({"correct_stop.csv", "threshold,eligible,correct,rate\n" + fixed(stopThreshold, 3) + ","
                                               + std::to_string(stops.eligible) + ","
                                               + std::to_string(stops.correct) + "," + fixed(stops.rate) + "\n"});

    auto summary = std::ostringstream {};
    summary << "trajectories            " << logs.size() << "\n"
            << "decision turns          " << actions.decisions << "\n";
    for (auto const choice: kAllActions)
        summary << "  " << to_string(choice) << std::string(22 - to_string(choice).size(), ' ')
                << fixed(actions.share(choice), 4) << "\n";
    summary << "avg turns               " << fixed(turns, 4) << "\n"
            << "mean best score         " << fixed(bvf.mean_best, 4) << "\n"
            << "mean final score        " << fixed(bvf.mean_final, 4) << "\n"
            << "best - final            " << fixed(bvf.delta, 4) << "\n"
            << "per-turn mean score    ";
    for (auto const& point: curve)
        summary << " t" << point.turn << "=" << fixed(point.mean, 4);
    summary << "\n"
            << "latency total (s)       " << fixed(latency.total, 3) << "\n"
            << "latency mean (s)        " << fixed(latency.mean_per_trajectory, 3) << "\n"
            << "correct stop rate       " << fixed(stops.rate, 4) << " (" << stops.correct << "/" << stops.eligible
            << " at >= " << fixed(stopThreshold, 2) << ")\n";

    if (auto const* pairsPath = find_input(spec, "pairs"))
    {
        auto pairs = std::vector<metrics::JudgedPair> {};
        auto lineNo = 0;
        for (auto const& line: io::read_lines(*pairsPath))
        {
            ++lineNo;
            if (line.front() == '#')
                continue;
            auto fields = std::vector<std::string> {};
            auto stream = std::istringstream(line);
            for (auto field = std::string {}; std::getline(stream, field, ',');)
                fields.push_back(field);
            auto const where = *pairsPath + ":" + std::to_string(lineNo);
            if (fields.size() != 3)
                throw InputError(where + ": expected rho_a,rho_b,choice");
            auto pair = metrics::JudgedPair {};
            try
            {
                pair.rho_a = std::stod(fields[0]);
                pair.rho_b = std::stod(fields[1]);
            }
            catch (const std::exception&)
            {
                throw InputError(where + ": bad score");
            }
            if (fields[2] == "A")
                pair.human = metrics::Preference::A;
            else if (fields[2] == "B")
                pair.human = metrics::Preference::B;
            else if (fields[2] == "TIE")
                pair.human = metrics::Preference::Tie;
            else
                throw InputError(where + ": choice must be A, B or TIE");
            pairs.push_back(pair);
        }
        auto const margin = get_double(spec.settings, "report.tie_margin");
        auto const agreement = metrics::reviewer_human_agreement(pairs, margin);
        outputs.push_back({"agreement.csv", "tie_margin,pairs,decisive,agreements,reviewer_ties,human_ties,rate\n"
                                                + fixed(margin, 3) + "," + std::to_string(pairs.size()) + ","
                                                + std::to_string(agreement.decisive) + ","
                                                + std::to_string(agreement.agreements) + ","
                                                + std::to_string(agreement.reviewer_ties) + ","
                                                + std::to_string(agreement.human_ties) + ","
                                                + fixed(agreement.rate) + "\n"});
        summary << "reviewer-human agree    " << fixed(agreement.rate, 4) << " (" << agreement.agreements << "/"
                << agreement.decisive << " decisive)\n";
    }
    outputs.push_back({"summary.txt", summary.str()});
    log << summary.str();
    return outputs;
}

std::string manifest_name(const RunSpec& spec, const std::vector<OutputFile>& outputs)
{
    if (spec.subcommand == "audit-contamination")
        return outputs.front().name + ".manifest.json";
    return "manifest.json";
}

} // namespace

std::vector<OutputFile> execute(const RunSpec& spec, std::ostream& log)
{
    if (spec.subcommand == "simulate")
        return run_simulate(spec, log);
    if (spec.subcommand == "train")
        return run_train(spec, log);
    if (spec.subcommand == "construct-data")
        return run_construct_data(spec, log);
    if (spec.subcommand == "audit-contamination")
        return run_audit(spec, log);
    if (spec.subcommand == "report")
        return run_report(spec, log);
    throw InputError("unknown subcommand '" + spec.subcommand + "'");
}

std::string manifest_json(const RunSpec& spec, const std::vector<OutputFile>& outputs)
{
    auto j = io::Json::object();
    j["tool"] = "gennav";
    j["version"] = kVersion;
    j["subcommand"] = spec.subcommand;
    j["seed"] = get_u64(spec.settings, "seed");
    j["config_hash"] = io::hex64(config_hash(spec.settings));
    auto settings = io::Json::object();
    for (auto const& [key, value]: spec.settings)
        settings[key] = value;
    j["settings"] = std::move(settings);
    auto inputs = io::Json::object();
    for (auto const& [role, path]: spec.inputs)
        inputs[role] = io::Json {{"path", path}, {"fnv1a64", io::hex64(io::fnv1a64(io::read_text_file(path)))}};
    j["inputs"] = std::move(inputs);
    if (!spec.output_name.empty())
        j["output_name"] = spec.output_name;
    auto files = io::Json::array();
    for (auto const& output: outputs)
        files.push_back(io::Json {{"name", output.name},
                                  {"bytes", output.contents.size()},
                                  {"fnv1a64", io::hex64(io::fnv1a64(output.contents))}});
    j["outputs"] = std::move(files);
    return j.dump(2) + "\n";
}

RunSpec spec_from_manifest(const std::string& manifest_text, std::map<std::string, std::string>* input_hashes,
                           std::map<std::string, std::string>* output_hashes)
{
    auto const j = io::Json::parse(manifest_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("malformed manifest");
    try
    {
        auto spec = RunSpec {};
        spec.subcommand = j.at("subcommand").get<std::string>();
        spec.settings = default_settings();
        for (auto const& [key, value]: j.at("settings").items())
            set_value(spec.settings, key, value.get<std::string>());
        if (j.at("config_hash").get<std::string>() != io::hex64(config_hash(spec.settings)))
            throw InputError("manifest config_hash does not match its settings");
        for (auto const& [role, entry]: j.at("inputs").items())
        {
            spec.inputs[role] = entry.at("path").get<std::string>();
            if (input_hashes)
                (*input_hashes)[role] = entry.at("fnv1a64").get<std::string>();
        }
        if (j.contains("output_name"))
            spec.output_name = j.at("output_name").get<std::string>();
        if (output_hashes)
            for (auto const& entry: j.at("outputs"))
                (*output_hashes)[entry.at("name").get<std::string>()] = entry.at("fnv1a64").get<std::string>();
        return spec;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("malformed manifest: ") + e.what());
    }
}

void publish(const RunSpec& spec, const std::vector<OutputFile>& outputs, const fs::path& dir,
             const std::string& manifest_name)
{
    auto const manifest = manifest_json(spec, outputs);
    auto createdDir = false;
    auto written = std::vector<fs::path> {};
    try
    {
        if (!fs::exists(dir))
            createdDir = fs::create_directories(dir);
        for (auto const& output: outputs)
        {
            written.push_back(dir / output.name);
            io::write_text_file(written.back().string(), output.contents);
        }
        written.push_back(dir / manifest_name);
        io::write_text_file(written.back().string(), manifest);
    }
    catch (...)
    {
        auto ec = std::error_code {};
        for (auto const& path: written)
            if (fs::is_regular_file(path, ec))
                fs::remove(path, ec);
        if (createdDir)
            fs::remove(dir, ec);
        throw;
    }
}

namespace
{

struct FlagBinding
{
    std::string key; ///< settings key or input role
    std::string value;
    CLI::Option* option = nullptr;
};

class SubcommandFlags
{
public:
    explicit SubcommandFlags(CLI::App* app): _app(app)
    {
        add_setting("--seed", "seed", "root random seed");
        add_setting("--workers", "workers", "parallel workers (0 = all cores)");
        _config = _app->add_option("--config", _configPath, "key = value settings file");
    }

    SubcommandFlags& add_setting(const std::string& flag, const std::string& key, const std::string& help)
    {
        auto& binding = _settings.emplace_back(FlagBinding {key, {}, nullptr});
        binding.option = _app->add_option(flag, binding.value, help + " [" + key + "]");
        return *this;
    }

    SubcommandFlags& add_input(const std::string& flag, const std::string& role, const std::string& help,
                               bool required = false)
    {
        auto& binding = _inputs.emplace_back(FlagBinding {role, {}, nullptr});
        binding.option = _app->add_option(flag, binding.value, help);
        if (required)
            binding.option->required();
        return *this;
    }

    SubcommandFlags& add_env_flags()
    {
        add_setting("--tmax", "t_max", "turn budget");
        add_setting("--n-prompts", "n_prompts", "synthetic prompt pool size");
        add_input("--prompts", "prompts", "prompt pool (JSON lines) instead of the synthetic pool");
        add_setting("--env", "env.mode", "sim or live");
        add_setting("--generator-url", "env.generator_url", "live generator endpoint");
        add_setting("--reviewer-url", "env.reviewer_url", "live reviewer endpoint");
        add_setting("--timeout-ms", "env.timeout_ms", "live request timeout");
        add_setting("--retries", "env.retries", "live retry count");
        return *this;
    }

    CLI::App* app() const { return _app; }

    RunSpec resolve() const
    {
        auto spec = RunSpec {.subcommand = _app->get_name(), .settings = default_settings(), .inputs = {},
                             .output_name = {}};
        if (_config->count() > 0)
            merge_config_file(spec.settings, _configPath);
        for (auto const& binding: _settings)
            if (binding.option->count() > 0)
                set_value(spec.settings, binding.key, binding.value);
        for (auto const& binding: _inputs)
            if (binding.option->count() > 0)
            {
                if (!fs::is_regular_file(binding.value))
                    throw InputError("cannot open input file: " + binding.value);
                spec.inputs[binding.key] = fs::absolute(binding.value).lexically_normal().string();
            }
        return spec;
    }

private:
    CLI::App* _app;
    std::deque<FlagBinding> _settings;
    std::deque<FlagBinding> _inputs;
    std::string _configPath;
    CLI::Option* _config = nullptr;
};

int run_replay(const std::string& manifestPath, const std::string& outDir, std::ostream& out, std::ostream& err)
{
    auto inputHashes = std::map<std::string, std::string> {};
    auto outputHashes = std::map<std::string, std::string> {};
    auto const spec = spec_from_manifest(io::read_text_file(manifestPath), &inputHashes, &outputHashes);
    for (auto const& [role, path]: spec.inputs)
        if (io::hex64(io::fnv1a64(io::read_text_file(path))) != inputHashes[role])
            throw Error("input '" + role + "' changed since the recorded run: " + path);

    auto const outputs = execute(spec, out);
    auto const dir = outDir.empty() ? fs::path(manifestPath).parent_path() / "replay" : fs::path(outDir);
    publish(spec, outputs, dir, manifest_name(spec, outputs));

    auto mismatches = 0;
    for (auto const& output: outputs)
    {
        auto const it = outputHashes.find(output.name);
        auto const hash = io::hex64(io::fnv1a64(output.contents));
        if (it == outputHashes.end() || it->second != hash)
        {
            err << "replay: MISMATCH " << output.name << "\n";
            ++mismatches;
        }
    }
    if (outputs.size() != outputHashes.size())
    {
        err << "replay: output set differs (" << outputs.size() << " vs " << outputHashes.size() << " recorded)\n";
        ++mismatches;
    }
    if (mismatches > 0)
        return 1;
    out << "replay: " << outputs.size() << "/" << outputHashes.size() << " outputs identical in " << dir.string()
        << "\n";
    return 0;
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    auto app = CLI::App("gennav: multi-turn generation navigator toolkit (simulation, training, data, audits)",
                        "gennav");
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(kVersion));

    auto flags = std::deque<SubcommandFlags> {};
    auto outDir = std::string {};

    auto& simulate = flags.emplace_back(app.add_subcommand("simulate", "run a navigator policy over a prompt pool"));
    simulate.add_env_flags()
        .add_setting("--policy", "policy.kind",
                     "softmax | heuristic | one-shot | refine-only | regenerate-only | preference")
        .add_setting("--high", "policy.high", "heuristic stop threshold")
        .add_setting("--mid", "policy.mid", "heuristic refine threshold")
        .add_setting("--tie-margin", "policy.tie_margin", "preference-reference tie margin")
        .add_input("--params", "params", "softmax policy parameter file");
    simulate.app()->add_option("--out", outDir, "output directory")->required();

    auto& train = flags.emplace_back(app.add_subcommand("train", "group-relative policy training"));
    train.add_env_flags()
        .add_setting("--reward-variant", "reward.variant",
                     "pre-grpo | final-only | best-only | no-peak | no-retention | no-efficiency")
        .add_setting("--alpha", "reward.alpha", "retention weight")
        .add_setting("--beta", "reward.beta", "turn-cost weight")
        .add_setting("--gamma", "reward.gamma", "format weight")
        .add_setting("--k", "train.k", "group size")
        .add_setting("--steps", "train.steps", "optimization steps")
        .add_setting("--lr", "train.lr", "learning rate")
        .add_setting("--clip", "train.clip", "clip epsilon")
        .add_setting("--prompts-per-step", "train.prompts_per_step", "groups per step")
        .add_setting("--inner-epochs", "train.inner_epochs", "updates per collected batch")
        .add_setting("--init", "train.init", "zeros | heuristic")
        .add_input("--init-params", "init_params", "start from this parameter file");
    train.app()->add_option("--out", outDir, "output directory")->required();

    auto& construct = flags.emplace_back(app.add_subcommand("construct-data", "branch-and-select trajectory data"));
    construct.add_env_flags()
        .add_setting("--k", "datagen.k", "branches per turn")
        .add_setting("--rho-thr", "datagen.rho_thr", "stop threshold")
        .add_setting("--refine-share", "datagen.refine_share", "REFINE share of proposed branches")
        .add_setting("--min-peak", "datagen.min_peak", "filter: best score must exceed this");
    construct.app()->add_option("--out", outDir, "output directory")->required();

    auto reportPath = std::string {};
    auto& auditFlags = flags.emplace_back(app.add_subcommand("audit-contamination", "benchmark overlap audit"));
    auditFlags.add_input("--bench", "bench", "benchmark prompts, one per line", true)
        .add_input("--pool", "pool", "training prompts, one per line", true)
        .add_input("--vectors-bench", "vectors_bench", "benchmark embeddings, comma-separated rows")
        .add_input("--vectors-pool", "vectors_pool", "pool embeddings, comma-separated rows")
        .add_setting("--threshold8", "contamination.threshold8", "8-gram containment flag threshold")
        .add_setting("--cosine-threshold", "contamination.cosine_threshold", "cosine flag threshold");
    auditFlags.app()->add_option("--report", reportPath, "report file (JSON)")->required();

    auto& report = flags.emplace_back(app.add_subcommand("report", "metrics over trajectory logs"));
    report.add_input("--logs", "logs", "trajectory log (JSON lines)", true)
        .add_input("--pairs", "pairs", "reviewer/human pairs: rho_a,rho_b,A|B|TIE per line")
        .add_setting("--cost-gen", "report.cost_generation", "seconds per generation")
        .add_setting("--cost-review", "report.cost_review", "seconds per review")
        .add_setting("--cost-decision", "report.cost_decision", "seconds per navigator decision")
        .add_setting("--stop-threshold", "report.stop_threshold", "correct-stop threshold")
        .add_setting("--tie-margin", "report.tie_margin", "reviewer tie margin for agreement");
    report.app()->add_option("--out", outDir, "output directory")->required();

    auto manifestPath = std::string {};
    auto* replay = app.add_subcommand("replay", "re-run a recorded invocation and compare outputs");
    replay->add_option("--manifest", manifestPath, "manifest.json of the run")->required();
    replay->add_option("--out", outDir, "output directory (default: <manifest dir>/replay)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return 0;
    }
    catch (const CLI::CallForVersion&)
    {
        out << kVersion << "\n";
        return 0;
    }
    catch (const CLI::ParseError& e)
    {
        err << "gennav: " << e.what() << "\n\n";
        auto const subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try
    {
        if (replay->parsed())
            return run_replay(manifestPath, outDir, out, err);

        for (auto const& sub: flags)
        {
            if (!sub.app()->parsed())
                continue;
            auto spec = sub.resolve();
            auto dir = fs::path(outDir);
            if (spec.subcommand == "audit-contamination")
            {
                auto const target = fs::path(reportPath);
                if (!target.has_filename())
                    throw InputError("--report must name a file");
                spec.output_name = target.filename().string();
                dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
            }
            auto const outputs = execute(spec, out);
            publish(spec, outputs, dir, manifest_name(spec, outputs));
            return 0;
        }
        throw InputError("no subcommand");
    }
    catch (const env::EpisodeError& e)
    {
        err << "gennav: " << e.what() << "\n";
        if (!e.partial().turns.empty())
            err << "partial trajectory: " << io::encode_trajectory(e.partial()) << "\n";
        return 1;
    }
    catch (const InputError& e)
    {
        err << "gennav: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e)
    {
        err << "gennav: " << e.what() << "\n";
        return 1;
    }
}

} // namespace gennav::cli
