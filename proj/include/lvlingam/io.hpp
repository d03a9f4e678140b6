#pragma once

// File formats: graph JSON, sample and price CSV, result JSON, manifests.
// Vertices are 1-based in every file and 0-based in memory.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "lvlingam/experiments.hpp"
#include "lvlingam/graph_analysis.hpp"
#include "lvlingam/pipeline.hpp"

namespace lvlingam::io {

using Json = nlohmann::ordered_json;

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

Json to_json(const LinearSem& sem);
/// Throws Error(Parse) naming the offending field.
LinearSem sem_from_json(const Json& j);

Json matrix_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& field);

Json to_json(const SupportMatrix& s);
SupportMatrix support_from_json(const Json& j);

Json to_json(const PathVerdictMatrix& v, const std::vector<std::string>& names);
PathVerdictMatrix verdicts_from_json(const Json& j);

Json mixing_json(const MixingEstimate& est, const std::vector<std::string>& names);
Json effects_json(const DiscoveryResult& r, const std::vector<std::string>& names);
Json report_json(const LinearSem& sem, const MinimalityReport& report, const Reduction& reduction);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename. Throws Error(Io).
void write_file(const std::filesystem::path& path, const std::string& contents);
Json read_json(const std::filesystem::path& path);
/// Two-space indent with a trailing newline.
std::string dump(const Json& j);

/// Header row of names, one sample per line.
std::string samples_csv(const SampleMatrix& s);
SampleMatrix parse_samples_csv(const std::string& text);

/// First column dates, then one column per series; empty, NA or nan cells
/// are missing.
PriceTable parse_prices_csv(const std::string& text);
std::string returns_csv(const PriceTable& r);

std::string benchmark_csv(const BenchmarkResult& r);

std::string sha256_hex(const std::string& bytes);
std::string utc_timestamp();

}  // namespace lvlingam::io
