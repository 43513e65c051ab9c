#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankrl/linalg.hpp"
#include "rankrl/rng.hpp"

namespace rankrl {

struct Document {
    Vector features;
    int relevance = 0;
};

struct Query {
    std::string id;
    std::vector<Document> candidates;
};

// Per-feature range fitted on the train partition.
struct FeatureRange {
    double min = 0.0;
    double max = 0.0;
};

struct Dataset {
    std::vector<Query> train;
    std::vector<Query> valid;
    std::vector<Query> test;
    int feature_count = 0;
    int max_label = 4;
    std::vector<FeatureRange> normalization;  // empty until normalize_features ran
};

// One parsed SVMLight/LETOR line: `<label> qid:<id> <fid>:<val>... [# comment]`.
struct ParsedLine {
    std::string query_id;
    int relevance = 0;
    Vector features;
};

// Feature ids are 1-based; unmentioned features are 0. Throws on malformed
// tokens, non-integer labels, out-of-range or duplicate feature ids.
ParsedLine parse_letor_line(const std::string& line, int feature_count);

// Inverse of parse_letor_line, emitting every feature with full precision so
// that a format/parse round trip is exact.
std::string format_letor_line(const ParsedLine& line);

// One Query per distinct qid (lines grouped even when non-contiguous),
// document order following file order. Parse errors abort with line number.
std::vector<Query> load_partition(const std::string& path, int feature_count);

// Min-max statistics fitted on train and applied to all partitions.
// Constant features map to 0; valid/test values are clipped to [0, 1].
Dataset normalize_features(Dataset dataset);

// Keeps exactly the queries that can fill a k-slot result page.
std::vector<Query> filter_queries(std::vector<Query> queries, int k);

// Uniform draw with replacement.
const Query& sample_query(const std::vector<Query>& partition, Rng& rng);

enum class LabelSignal { one_hot };

struct SyntheticConfig {
    int train_queries = 200;
    int valid_queries = 50;
    int test_queries = 50;
    int docs_per_query = 20;
    int feature_count = 5;
    int max_label = 4;
    LabelSignal label_signal = LabelSignal::one_hot;
    double noise_scale = 0.0;
    std::uint64_t seed = 1;
};

// Random graded labels with the label one-hot in the first max_label+1
// features and uniform noise of the given scale in the rest. Query ids are
// unique across partitions. Bit-reproducible from the seed.
Dataset synthesize_dataset(const SyntheticConfig& config, int k);

// Version-tagged binary cache of a (possibly normalized) dataset.
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

// Writes a partition back out as LETOR text (one line per document).
void write_partition(const std::string& path, const std::vector<Query>& queries);

}  // namespace rankrl
