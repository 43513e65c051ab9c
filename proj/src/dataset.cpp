#include "rankrl/dataset.hpp"

#include "rankrl/text.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rankrl {

namespace {

[[noreturn]] void parse_fail(const std::string& line, const std::string& why) {
    throw std::runtime_error("bad LETOR line (" + why + "): " + line);
}

// Strict base-10 integer; rejects trailing junk like "2x".
bool parse_int(const std::string& token, int& out) {
    try {
        std::size_t used = 0;
        out = std::stoi(token, &used);
        return used == token.size();
    } catch (const std::exception&) {
        return false;
    }
}

bool parse_double(const std::string& token, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(token, &used);
        return used == token.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

ParsedLine parse_letor_line(const std::string& line, int feature_count) {
    if (feature_count <= 0) throw std::invalid_argument("feature_count must be positive");

    // Everything after '#' is a comment.
    std::string body = line.substr(0, line.find('#'));
    std::istringstream tokens(body);

    std::string label_token;
    if (!(tokens >> label_token)) parse_fail(line, "empty line");
    ParsedLine parsed;
    if (!parse_int(label_token, parsed.relevance))
        parse_fail(line, "label is not an integer");

    std::string qid_token;
    if (!(tokens >> qid_token) || qid_token.rfind("qid:", 0) != 0 || qid_token.size() == 4)
        parse_fail(line, "missing qid:<id>");
    parsed.query_id = qid_token.substr(4);

    parsed.features = Vector::Zero(feature_count);
    std::vector<bool> seen(static_cast<std::size_t>(feature_count), false);
    std::string pair;
    while (tokens >> pair) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) parse_fail(line, "feature token without ':'");
        int fid = 0;
        double value = 0.0;
        if (!parse_int(pair.substr(0, colon), fid))
            parse_fail(line, "feature id is not an integer");
        if (fid < 1 || fid > feature_count)
            parse_fail(line, "feature id " + std::to_string(fid) + " out of range 1.." +
                                 std::to_string(feature_count));
        if (seen[static_cast<std::size_t>(fid - 1)])
            parse_fail(line, "duplicate feature id " + std::to_string(fid));
        if (!parse_double(pair.substr(colon + 1), value))
            parse_fail(line, "feature value is not a number");
        seen[static_cast<std::size_t>(fid - 1)] = true;
        parsed.features[fid - 1] = value;
    }
    return parsed;
}

std::string format_letor_line(const ParsedLine& line) {
    std::string out = std::to_string(line.relevance) + " qid:" + line.query_id;
    for (int i = 0; i < line.features.size(); ++i)
        out += " " + std::to_string(i + 1) + ":" + format_double(line.features[i]);
    return out;
}

std::vector<Query> load_partition(const std::string& path, int feature_count) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<Query> queries;
    std::map<std::string, std::size_t> index_of;  // qid -> slot in `queries`
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ParsedLine parsed;
        try {
            parsed = parse_letor_line(line, feature_count);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_number) + ": " + e.what());
        }
        auto [it, inserted] = index_of.try_emplace(parsed.query_id, queries.size());
        if (inserted) queries.push_back({parsed.query_id, {}});
        queries[it->second].candidates.push_back(
            {std::move(parsed.features), parsed.relevance});
    }
    return queries;
}

Dataset normalize_features(Dataset dataset) {
    if (dataset.train.empty())
        throw std::invalid_argument("normalize_features needs a non-empty train partition");
    const int n = dataset.feature_count;

    std::vector<FeatureRange> ranges(static_cast<std::size_t>(n));
    bool first = true;
    for (const Query& q : dataset.train)
        for (const Document& d : q.candidates) {
            for (int f = 0; f < n; ++f) {
                auto& r = ranges[static_cast<std::size_t>(f)];
                if (first) {
                    r.min = r.max = d.features[f];
                } else {
                    r.min = std::min(r.min, d.features[f]);
                    r.max = std::max(r.max, d.features[f]);
                }
            }
            first = false;
        }
    if (first) throw std::invalid_argument("train partition has no documents");

    auto apply = [&](std::vector<Query>& queries, bool clip) {
        for (Query& q : queries)
            for (Document& d : q.candidates)
                for (int f = 0; f < n; ++f) {
                    const auto& r = ranges[static_cast<std::size_t>(f)];
                    double v = r.max > r.min ? (d.features[f] - r.min) / (r.max - r.min) : 0.0;
                    if (clip) v = std::clamp(v, 0.0, 1.0);
                    d.features[f] = v;
                }
    };
    apply(dataset.train, false);
    apply(dataset.valid, true);
    apply(dataset.test, true);
    dataset.normalization = std::move(ranges);
    return dataset;
}

std::vector<Query> filter_queries(std::vector<Query> queries, int k) {
    std::erase_if(queries,
                  [k](const Query& q) { return q.candidates.size() < static_cast<std::size_t>(k); });
    return queries;
}

const Query& sample_query(const std::vector<Query>& partition, Rng& rng) {
    if (partition.empty()) throw std::invalid_argument("cannot sample from an empty partition");
    return partition[static_cast<std::size_t>(
        uniform_index(rng, static_cast<int>(partition.size())))];
}

Dataset synthesize_dataset(const SyntheticConfig& config, int k) {
    if (config.docs_per_query < k)
        throw std::invalid_argument("docs_per_query " + std::to_string(config.docs_per_query) +
                                    " is below the page size k=" + std::to_string(k));
    if (config.max_label < 0) throw std::invalid_argument("max_label must be non-negative");
    if (config.feature_count < config.max_label + 1)
        throw std::invalid_argument("feature_count must cover the one-hot label block (need >= " +
                                    std::to_string(config.max_label + 1) + ")");
    if (config.noise_scale < 0.0) throw std::invalid_argument("noise_scale must be >= 0");

    Dataset ds;
    ds.feature_count = config.feature_count;
    ds.max_label = config.max_label;

    Rng rng(config.seed);
    int next_qid = 1;
    auto make_partition = [&](int query_count) {
        std::vector<Query> queries;
        queries.reserve(static_cast<std::size_t>(query_count));
        for (int q = 0; q < query_count; ++q) {
            Query query;
            query.id = std::to_string(next_qid++);
            for (int d = 0; d < config.docs_per_query; ++d) {
                Document doc;
                doc.relevance = uniform_index(rng, config.max_label + 1);
                doc.features = Vector::Zero(config.feature_count);
                doc.features[doc.relevance] = 1.0;
                // The noise draw always happens so that labels and features
                // match across noise scales under the same seed.
                for (int f = config.max_label + 1; f < config.feature_count; ++f)
                    doc.features[f] = config.noise_scale * uniform_real(rng);
                query.candidates.push_back(std::move(doc));
            }
            queries.push_back(std::move(query));
        }
        return queries;
    };
    ds.train = make_partition(config.train_queries);
    ds.valid = make_partition(config.valid_queries);
    ds.test = make_partition(config.test_queries);
    return ds;
}

namespace {

constexpr char kDatasetMagic[4] = {'R', 'K', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const auto n = read_pod<std::uint64_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

void write_queries(std::ostream& out, const std::vector<Query>& queries) {
    write_pod<std::uint64_t>(out, queries.size());
    for (const Query& q : queries) {
        write_string(out, q.id);
        write_pod<std::uint64_t>(out, q.candidates.size());
        for (const Document& d : q.candidates) {
            write_pod<std::int32_t>(out, d.relevance);
            for (int f = 0; f < d.features.size(); ++f) write_pod<double>(out, d.features[f]);
        }
    }
}

std::vector<Query> read_queries(std::istream& in, int feature_count) {
    std::vector<Query> queries(read_pod<std::uint64_t>(in));
    for (Query& q : queries) {
        q.id = read_string(in);
        q.candidates.resize(read_pod<std::uint64_t>(in));
        for (Document& d : q.candidates) {
            d.relevance = read_pod<std::int32_t>(in);
            d.features = Vector(feature_count);
            for (int f = 0; f < feature_count; ++f) d.features[f] = read_pod<double>(in);
        }
    }
    return queries;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kDatasetMagic, sizeof(kDatasetMagic));
    write_pod<std::uint32_t>(out, kDatasetVersion);
    write_pod<std::int32_t>(out, dataset.feature_count);
    write_pod<std::int32_t>(out, dataset.max_label);
    write_pod<std::uint64_t>(out, dataset.normalization.size());
    for (const FeatureRange& r : dataset.normalization) {
        write_pod<double>(out, r.min);
        write_pod<double>(out, r.max);
    }
    write_queries(out, dataset.train);
    write_queries(out, dataset.valid);
    write_queries(out, dataset.test);
    if (!out) throw std::runtime_error("write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kDatasetMagic, sizeof(kDatasetMagic)) != 0)
        throw std::runtime_error("dataset file " + path + ": bad magic");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kDatasetVersion)
        throw std::runtime_error("dataset file " + path + ": unsupported version " +
                                 std::to_string(version));
    Dataset ds;
    ds.feature_count = read_pod<std::int32_t>(in);
    ds.max_label = read_pod<std::int32_t>(in);
    ds.normalization.resize(read_pod<std::uint64_t>(in));
    for (FeatureRange& r : ds.normalization) {
        r.min = read_pod<double>(in);
        r.max = read_pod<double>(in);
    }
    ds.train = read_queries(in, ds.feature_count);
    ds.valid = read_queries(in, ds.feature_count);
    ds.test = read_queries(in, ds.feature_count);
    if (!in) throw std::runtime_error("dataset file " + path + ": truncated");
    return ds;
}

void write_partition(const std::string& path, const std::vector<Query>& queries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const Query& q : queries)
        for (const Document& d : q.candidates)
            out << format_letor_line({q.id, d.relevance, d.features}) << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace rankrl
