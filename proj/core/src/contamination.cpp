// SPDX-License-Identifier: Apache-2.0
#include "gennav/contamination.hpp"

#include "gennav/error.hpp"
#include "gennav/parallel.hpp"
#include "gennav/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace gennav::contamination
{

namespace
{

bool is_separator(char32_t cp)
{
    if (cp < 0x80)
    {
        auto const c = static_cast<unsigned char>(cp);
        return std::isspace(c) || std::ispunct(c) || std::iscntrl(c);
    }
    switch (cp)
    {
        case 0x85: case 0xA0: case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
        case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        case 0x3001: case 0x3002: case 0x3003: case 0xFEFF:
            return true;
        default: break;
    }
    return (cp >= 0x2000 && cp <= 0x200A) || (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E)
           || (cp >= 0x3008 && cp <= 0x3011);
}

// Decodes one UTF-8 sequence at text[pos]; malformed bytes decode as themselves.
std::pair<char32_t, std::size_t> decode(std::string_view text, std::size_t pos)
{
    auto const lead = static_cast<unsigned char>(text[pos]);
    auto length = std::size_t {1};
    auto cp = static_cast<char32_t>(lead);
    if ((lead & 0xE0) == 0xC0)
    {
        length = 2;
        cp = lead & 0x1F;
    }
    else if ((lead & 0xF0) == 0xE0)
    {
        length = 3;
        cp = lead & 0x0F;
    }
    else if ((lead & 0xF8) == 0xF0)
    {
        length = 4;
        cp = lead & 0x07;
    }
    if (length == 1 || pos + length > text.size())
        return {lead < 0x80 ? cp : char32_t {0xFFFD}, 1};
    for (std::size_t i = 1; i < length; ++i)
    {
        auto const byte = static_cast<unsigned char>(text[pos + i]);
        if ((byte & 0xC0) != 0x80)
            return {0xFFFD, 1};
        cp = (cp << 6) | (byte & 0x3F);
    }
    return {cp, length};
}

} // namespace

std::vector<std::string> tokenize(std::string_view text)
{
    auto tokens = std::vector<std::string> {};
    auto current = std::string {};
    auto flush = [&] {
        if (!current.empty())
            tokens.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t pos = 0; pos < text.size();)
    {
        auto const [cp, length] = decode(text, pos);
        if (is_separator(cp))
            flush();
        else if (length == 1 && cp < 0x80)
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos]))));
        else
            current.append(text.substr(pos, length));
        pos += length;
    }
    flush();
    return tokens;
}

NGramSet ngrams(std::span<const std::string> tokens, int n)
{
    if (n < 1)
        throw InputError("n-gram order must be >= 1");
    auto grams = NGramSet {};
    auto const order = static_cast<std::size_t>(n);
    if (tokens.size() < order)
        return grams;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i)
    {
        auto gram = tokens[i];
        for (std::size_t j = 1; j < order; ++j)
            gram.append(" ").append(tokens[i + j]);
        grams.insert(std::move(gram));
    }
    return grams;
}

NGramProfile NGramProfile::build(std::string_view text)
{
    auto profile = NGramProfile {};
    profile.tokens = tokenize(text);
    profile.grams5 = ngrams(profile.tokens, 5);
    profile.grams8 = ngrams(profile.tokens, 8);
    profile.grams13 = ngrams(profile.tokens, 13);
    return profile;
}

const NGramSet& NGramProfile::grams(int n) const
{
    switch (n)
    {
        case 5: return grams5;
        case 8: return grams8;
        case 13: return grams13;
        default: throw InputError("n-gram order must be 5, 8 or 13");
    }
}

namespace
{

std::size_t intersection_size(const NGramSet& a, const NGramSet& b)
{
    auto const& small = a.size() <= b.size() ? a : b;
    auto const& large = a.size() <= b.size() ? b : a;
    return static_cast<std::size_t>(
        std::count_if(small.begin(), small.end(), [&](const std::string& g) { return large.contains(g); }));
}

double jaccard_from(std::size_t shared, std::size_t a, std::size_t b)
{
    auto const unionSize = a + b - shared;
    return unionSize == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(unionSize);
}

} // namespace

double jaccard5(const NGramProfile& a, const NGramProfile& b)
{
    return jaccard_from(intersection_size(a.grams5, b.grams5), a.grams5.size(), b.grams5.size());
}

double jaccard5(std::string_view a, std::string_view b)
{
    return jaccard5(NGramProfile::build(a), NGramProfile::build(b));
}

double containment(const NGramProfile& bench, const NGramProfile& train, int n)
{
    auto const& a = bench.grams(n);
    if (a.empty())
        throw InputError("containment undefined: benchmark text has no " + std::to_string(n) + "-grams");
    return static_cast<double>(intersection_size(a, train.grams(n))) / static_cast<double>(a.size());
}

double containment(std::string_view bench, std::string_view train, int n)
{
    return containment(NGramProfile::build(bench), NGramProfile::build(train), n);
}

PoolIndex::PoolIndex(std::vector<std::string> pool): _texts(std::move(pool))
{
    _profiles.reserve(_texts.size());
    for (auto const& text: _texts)
        _profiles.push_back(NGramProfile::build(text));
    for (auto const n: kProfileOrders)
    {
        auto& index = _index[n];
        for (std::size_t i = 0; i < _profiles.size(); ++i)
            for (auto const& gram: _profiles[i].grams(n))
                index[io::fnv1a64(gram)].push_back(i);
    }
}

std::unordered_map<std::size_t, std::size_t> PoolIndex::overlap_counts(const NGramProfile& bench, int n) const
{
    auto counts = std::unordered_map<std::size_t, std::size_t> {};
    auto const& index = _index.at(n);
    for (auto const& gram: bench.grams(n))
    {
        auto const hit = index.find(io::fnv1a64(gram));
        if (hit == index.end())
            continue;
        auto last = std::optional<std::size_t> {};
        for (auto const id: hit->second)
        {
            // a prompt is listed once per distinct gram, so repeats mean a hash collision
            if (id == last || !_profiles[id].grams(n).contains(gram))
                continue;
            last = id;
            ++counts[id];
        }
    }
    return counts;
}

std::size_t PoolIndex::pick(std::size_t current, std::size_t challenger) const
{
    if (_texts[challenger] != _texts[current])
        return _texts[challenger] < _texts[current] ? challenger : current;
    return std::min(current, challenger);
}

std::optional<Nearest> PoolIndex::max_containment(const NGramProfile& bench, int n) const
{
    auto const total = bench.grams(n).size();
    if (total == 0)
        return std::nullopt;
    auto best = Nearest {};
    auto bestCount = std::size_t {0};
    for (auto const& [id, count]: overlap_counts(bench, n))
    {
        if (!best.index || count > bestCount)
        {
            best.index = id;
            bestCount = count;
        }
        else if (count == bestCount)
            best.index = pick(*best.index, id);
    }
    best.value = static_cast<double>(bestCount) / static_cast<double>(total);
    return best;
}

Nearest PoolIndex::max_jaccard5(const NGramProfile& bench) const
{
    auto best = Nearest {};
    for (auto const& [id, shared]: overlap_counts(bench, 5))
    {
        auto const value = jaccard_from(shared, bench.grams5.size(), _profiles[id].grams5.size());
        if (!best.index || value > best.value)
        {
            best.index = id;
            best.value = value;
        }
        else if (value == best.value)
            best.index = pick(*best.index, id);
    }
    return best;
}

bool PoolIndex::any_shared(const NGramProfile& bench, int n) const
{
    auto const& index = _index.at(n);
    for (auto const& gram: bench.grams(n))
    {
        auto const hit = index.find(io::fnv1a64(gram));
        if (hit == index.end())
            continue;
        for (auto const id: hit->second)
            if (_profiles[id].grams(n).contains(gram))
                return true;
    }
    return false;
}

FlagResult flag_8gram(std::string_view bench, const PoolIndex& pool, double threshold)
{
    auto result = FlagResult {};
    auto const nearest = pool.max_containment(NGramProfile::build(bench), 8);
    if (!nearest)
        return result;
    result.containment = nearest->value;
    result.nearest = nearest->index;
    result.flagged = nearest->index.has_value() && nearest->value >= threshold;
    return result;
}

bool collide_13gram(std::string_view bench, const PoolIndex& pool)
{
    return pool.any_shared(NGramProfile::build(bench), 13);
}

namespace
{

Vectors normalized_rows(const Vectors& vectors, const char* what)
{
    auto result = vectors;
    for (Eigen::Index r = 0; r < result.rows(); ++r)
    {
        auto const norm = result.row(r).norm();
        if (!std::isfinite(norm) || norm == 0.0)
            throw InputError(std::string(what) + " vector " + std::to_string(r + 1) + " has zero or non-finite norm");
        if (std::abs(norm - 1.0) > 1e-6)
            result.row(r) /= norm;
    }
    return result;
}

} // namespace

std::vector<CosineResult> cosine_screen(const Vectors& bench, const Vectors& pool, double threshold)
{
    if (pool.rows() == 0)
        throw InputError("cosine screen needs a non-empty pool");
    if (bench.cols() != pool.cols())
        throw InputError("benchmark and pool vectors differ in dimension");
    auto const a = normalized_rows(bench, "benchmark");
    auto const b = normalized_rows(pool, "pool");
    auto results = std::vector<CosineResult> {};
    results.reserve(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index r = 0; r < a.rows(); ++r)
    {
        auto const similarities = (b * a.row(r).transpose()).eval();
        auto best = CosineResult {.max_similarity = similarities(0), .nearest = 0, .flagged = false};
        for (Eigen::Index p = 1; p < similarities.size(); ++p)
            if (similarities(p) > best.max_similarity)
                best = CosineResult {.max_similarity = similarities(p), .nearest = static_cast<std::size_t>(p),
                                     .flagged = false};
        best.max_similarity = std::clamp(best.max_similarity, -1.0, 1.0);
        best.flagged = best.max_similarity >= threshold;
        results.push_back(best);
    }
    return results;
}

Vectors read_vectors(const std::string& path)
{
    auto rows = std::vector<std::vector<double>> {};
    auto lineNo = 0;
    for (auto const& line: io::read_lines(path))
    {
        ++lineNo;
        auto row = std::vector<double> {};
        auto rest = std::string_view(line);
        while (true)
        {
            auto const comma = rest.find(',');
            auto field = rest.substr(0, comma);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
                field.remove_prefix(1);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
                field.remove_suffix(1);
            auto value = 0.0;
            auto const [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (field.empty() || ec != std::errc {} || ptr != field.data() + field.size() || !std::isfinite(value))
                throw InputError(path + ":" + std::to_string(lineNo) + ": bad vector component '"
                                 + std::string(field) + "'");
            row.push_back(value);
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(path + ":" + std::to_string(lineNo) + ": vector dimension mismatch");
        rows.push_back(std::move(row));
    }
    auto vectors = Vectors(static_cast<Eigen::Index>(rows.size()),
                           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return vectors;
}

Distribution summarize(std::span<const double> values)
{
    auto dist = Distribution {};
    dist.histogram.assign(20, 0);
    dist.count = values.size();
    if (values.empty())
        return dist;
    auto sorted = std::vector<double>(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double q) {
        auto const k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
        return sorted[std::clamp<std::size_t>(k, 1, sorted.size()) - 1];
    };
    for (auto const v: sorted)
    {
        dist.mean += v;
        auto const bin = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * 20.0);
        ++dist.histogram[std::min<std::size_t>(bin, 19)];
    }
    dist.mean /= static_cast<double>(sorted.size());
    dist.min = sorted.front();
    dist.max = sorted.back();
    dist.p50 = rank(0.5);
    dist.p90 = rank(0.9);
    dist.p99 = rank(0.99);
    return dist;
}

AuditReport audit(std::span<const std::string> bench, const PoolIndex& pool, const AuditOptions& options,
                  const Vectors* bench_vectors, const Vectors* pool_vectors)
{
    if ((bench_vectors == nullptr) != (pool_vectors == nullptr))
        throw InputError("cosine screening needs both benchmark and pool vectors");
    if (bench_vectors && static_cast<std::size_t>(bench_vectors->rows()) != bench.size())
        throw InputError("benchmark vectors are not row-aligned with the benchmark prompts");
    if (pool_vectors && static_cast<std::size_t>(pool_vectors->rows()) != pool.size())
        throw InputError("pool vectors are not row-aligned with the pool prompts");

    auto report = AuditReport {.bench_size = bench.size(), .pool_size = pool.size(), .entries = {}};
    report.entries.resize(bench.size());
    parallel_for(bench.size(), options.workers, [&](std::size_t i) {
        auto const profile = NGramProfile::build(bench[i]);
        auto& entry = report.entries[i];
        entry.bench_index = i;
        entry.jaccard5 = pool.max_jaccard5(profile).value;
        if (auto const c5 = pool.max_containment(profile, 5))
            entry.containment5 = c5->value;
        if (auto const c8 = pool.max_containment(profile, 8))
        {
            entry.containment8 = c8->value;
            entry.nearest = c8->index;
            entry.flag8 = c8->index.has_value() && c8->value >= options.containment_threshold;
        }
        entry.collision13 = pool.any_shared(profile, 13);
    });

    if (bench_vectors && bench.size() > 0)
    {
        auto const cosine = cosine_screen(*bench_vectors, *pool_vectors, options.cosine_threshold);
        for (std::size_t i = 0; i < cosine.size(); ++i)
        {
            report.entries[i].cosine = cosine[i].max_similarity;
            report.entries[i].cosine_flag = cosine[i].flagged;
        }
    }
    return report;
}

namespace
{

io::Json distribution_json(const Distribution& dist)
{
    auto j = io::Json::object();
    j["count"] = dist.count;
    j["mean"] = dist.mean;
    j["min"] = dist.min;
    j["p50"] = dist.p50;
    j["p90"] = dist.p90;
    j["p99"] = dist.p99;
    j["max"] = dist.max;
    j["histogram_bins"] = dist.histogram.size();
    j["histogram"] = dist.histogram;
    return j;
}

} // namespace

std::string audit_report_json(const AuditReport& report, std::span<const std::string> bench, const PoolIndex& pool)
{
    auto jaccard = std::vector<double> {};
    auto contain5 = std::vector<double> {};
    auto contain8 = std::vector<double> {};
    auto cosine = std::vector<double> {};
    auto flags8 = io::Json::array();
    auto flags13 = io::Json::array();
    auto flagsCosine = io::Json::array();
    auto entries = io::Json::array();

    for (auto const& entry: report.entries)
    {
        jaccard.push_back(entry.jaccard5);
        if (entry.containment5)
            contain5.push_back(*entry.containment5);
        if (entry.containment8)
            contain8.push_back(*entry.containment8);
        if (entry.cosine)
            cosine.push_back(*entry.cosine);

        auto const line = entry.bench_index + 1;
        if (entry.flag8)
        {
            auto flag = io::Json {{"line", line}, {"containment8", *entry.containment8}};
            if (entry.nearest)
                flag["nearest_pool_line"] = *entry.nearest + 1;
            flags8.push_back(std::move(flag));
        }
        if (entry.collision13)
            flags13.push_back(line);
        if (entry.cosine_flag)
            flagsCosine.push_back(io::Json {{"line", line}, {"cosine", *entry.cosine}});

        auto e = io::Json::object();
        e["line"] = line;
        e["text"] = bench[entry.bench_index];
        e["jaccard5"] = entry.jaccard5;
        e["containment5"] = entry.containment5 ? io::Json(*entry.containment5) : io::Json(nullptr);
        e["containment8"] = entry.containment8 ? io::Json(*entry.containment8) : io::Json(nullptr);
        e["nearest_pool_text"] = entry.nearest ? io::Json(pool.text(*entry.nearest)) : io::Json(nullptr);
        e["collision13"] = entry.collision13;
        if (entry.cosine)
            e["cosine"] = *entry.cosine;
        entries.push_back(std::move(e));
    }

    auto j = io::Json::object();
    j["v"] = io::kSchemaVersion;
    j["bench_size"] = report.bench_size;
    j["pool_size"] = report.pool_size;
    auto metricsJson = io::Json::object();
    metricsJson["jaccard5"] = distribution_json(summarize(jaccard));
    metricsJson["containment5"] = distribution_json(summarize(contain5));
    metricsJson["containment8"] = distribution_json(summarize(contain8));
    if (!cosine.empty())
        metricsJson["cosine"] = distribution_json(summarize(cosine));
    j["metrics"] = std::move(metricsJson);
    auto flags = io::Json::object();
    flags["containment8"] = std::move(flags8);
    flags["collision13"] = std::move(flags13);
    flags["cosine"] = std::move(flagsCosine);
    j["flags"] = std::move(flags);
    j["entries"] = std::move(entries);
    return j.dump(2) + "\n";
}

} // namespace gennav::contamination
