#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "contractkit/foundation.hpp"
#include "contractkit/graph.hpp"

namespace ck {

using Json = nlohmann::ordered_json;

// Built-in names (bern_half, bern_<p>, uniform_<n>) or a JSON file
// {"alphabet_size": n, "mass": [...]}.
Dist load_dist(const std::string& spec);
Dist parse_dist(const Json& j, const std::string& context);

// Built-in names (bsc_<eps>, identity_<n>) or a JSON file
// {"input_size": n, "output_size": m, "rows": [[...], ...]}.
Channel load_channel(const std::string& spec);
Channel parse_channel(const Json& j, const std::string& context);

// Text format: first non-comment line is the vertex count, then one "u v"
// pair per line. '#' starts a comment.
Graph load_graph(const std::string& path);
Graph parse_graph(const std::string& text, const std::string& context);

// Decimal parsing of a whole token; PARSE_ERROR on trailing junk.
double parse_real(const std::string& token, const std::string& context);
std::vector<double> parse_real_list(const std::string& csv, const std::string& context);
std::vector<std::size_t> parse_index_list(const std::string& csv, const std::string& context);

struct ReportStyle {
  bool exact = false;  // shortest round-trip digits instead of 12 significant
};

// Rounds to 12 significant digits unless exact; non-finite values become
// the strings "inf", "-inf", "nan".
Json number(double v, const ReportStyle& style);
Json vector_json(const Vec& v, const ReportStyle& style);
Json matrix_json(const Mat& m, const ReportStyle& style);
Json dist_json(const Dist& d, const ReportStyle& style);
Json channel_json(const Channel& k, const ReportStyle& style);

// Inverse of number().
double json_real(const Json& j);

std::string dump(const Json& j);

}  // namespace ck
