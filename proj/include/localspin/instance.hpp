#pragma once

// Quadratic spin problems: weighted graphs, their coupling matrices, and the
// Biq Mac sparse text format.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "localspin/error.hpp"

namespace localspin {

/// Undirected weighted edge, 0-based, canonical orientation i < j.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted graph G = (V, E, W) of a MAXCUT instance.
///
/// Edges are kept in canonical form: i < j, sorted by (i, j), no duplicates,
/// finite weights. External formats are 1-based; everything in memory is 0-based.
struct Instance {
  std::size_t n = 0;
  std::vector<Edge> edges;
  std::optional<std::string> family;
  std::optional<std::uint64_t> seed;

  /// Sum of all edge weights (each unordered pair once).
  double total_weight() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.w;
    return s;
  }

  /// Same graph, ignoring metadata.
  bool same_graph(const Instance& other) const {
    return n == other.n && edges == other.edges;
  }

  /// Throws InvalidArgument if any invariant is violated.
  void validate() const {
    if (n == 0) throw InvalidArgument("instance must have at least one vertex");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Edge& e = edges[k];
      if (e.i >= n || e.j >= n) throw InvalidArgument("edge index out of range");
      if (e.i == e.j) throw InvalidArgument("self-loop on vertex " + std::to_string(e.i + 1));
      if (e.i > e.j) throw InvalidArgument("edge not in canonical i<j orientation");
      if (!std::isfinite(e.w)) throw InvalidArgument("non-finite edge weight");
      if (k > 0) {
        const Edge& p = edges[k - 1];
        if (p.i == e.i && p.j == e.j) {
          throw InvalidArgument("duplicate edge (" + std::to_string(e.i + 1) + "," +
                                std::to_string(e.j + 1) + ")");
        }
        if (std::pair(p.i, p.j) > std::pair(e.i, e.j)) throw InvalidArgument("edges not sorted");
      }
    }
  }
};

/// Builds a validated Instance from edges in any orientation and order.
inline Instance make_instance(std::size_t n, std::vector<Edge> edges,
                              std::optional<std::string> family = std::nullopt,
                              std::optional<std::uint64_t> seed = std::nullopt) {
  for (auto& e : edges) {
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
  Instance inst{n, std::move(edges), std::move(family), seed};
  inst.validate();
  return inst;
}

/// Returns a copy with every weight multiplied by `factor`.
inline Instance scaled(const Instance& inst, double factor) {
  Instance out = inst;
  for (auto& e : out.edges) e.w *= factor;
  return out;
}

/// Symmetric zero-diagonal coupling matrix J with J_ij = w_ij / 2, stored as
/// compressed sparse rows holding both (i,j) and (j,i).
class CouplingMatrix {
 public:
  CouplingMatrix() = default;

  explicit CouplingMatrix(const Instance& inst) : n_(inst.n), row_ptr_(inst.n + 1, 0) {
    for (const auto& e : inst.edges) {
      ++row_ptr_[e.i + 1];
      ++row_ptr_[e.j + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) row_ptr_[i + 1] += row_ptr_[i];
    col_.resize(row_ptr_[n_]);
    val_.resize(row_ptr_[n_]);
    std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    // Edges are sorted by (i, j), so each row ends up sorted by column.
    for (const auto& e : inst.edges) {
      col_[fill[e.i]] = e.j;
      val_[fill[e.i]++] = e.w / 2.0;
    }
    for (const auto& e : inst.edges) {
      col_[fill[e.j]] = e.i;
      val_[fill[e.j]++] = e.w / 2.0;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      sort_row(i);
    }
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return col_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return val_[static_cast<std::size_t>(it - col_.begin())];
  }

  std::span<const std::size_t> row_columns(std::size_t i) const {
    return {col_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {val_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  /// y = J x.
  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
      y[i] = acc;
    }
  }

  double row_abs_sum(std::size_t i) const {
    double s = 0.0;
    for (double v : row_values(i)) s += std::abs(v);
    return s;
  }

  std::vector<std::vector<double>> dense() const {
    std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d[i][col_[k]] = val_[k];
    }
    return d;
  }

 private:
  void sort_row(std::size_t i) {
    const std::size_t b = row_ptr_[i], e = row_ptr_[i + 1];
    std::vector<std::pair<std::size_t, double>> row;
    row.reserve(e - b);
    for (std::size_t k = b; k < e; ++k) row.emplace_back(col_[k], val_[k]);
    std::sort(row.begin(), row.end());
    for (std::size_t k = b; k < e; ++k) {
      col_[k] = row[k - b].first;
      val_[k] = row[k - b].second;
    }
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

inline CouplingMatrix coupling_matrix(const Instance& inst) { return CouplingMatrix(inst); }

// ---------------------------------------------------------------------------
// Biq Mac text format
//
//   # comment lines are ignored
//   n m
//   i j w      (m lines, 1-based)
//
// A comment of the form "# localspin family=<tag> seed=<u64>" carries metadata.

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\f\v");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < s.size()) {
    while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    std::size_t start = k;
    while (k < s.size() && !std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    if (k > start) out.push_back(s.substr(start, k - start));
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// Shortest decimal that parses back to exactly `w`; integers print without a point.
inline std::string format_weight(double w) {
  if (w == std::trunc(w) && std::abs(w) < 1e15) {
    return std::to_string(static_cast<long long>(w));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), w);
  return std::string(buf, ptr);
}

inline void parse_metadata(std::string_view comment, Instance& inst) {
  auto tokens = split_ws(comment);
  if (tokens.size() < 2 || tokens[0] != "#" || tokens[1] != "localspin") return;
  for (std::size_t k = 2; k < tokens.size(); ++k) {
    auto eq = tokens[k].find('=');
    if (eq == std::string_view::npos) continue;
    auto key = tokens[k].substr(0, eq);
    auto value = tokens[k].substr(eq + 1);
    if (key == "family") inst.family = std::string(value);
    if (key == "seed") {
      if (auto s = parse_number<std::uint64_t>(value)) inst.seed = *s;
    }
  }
}

}  // namespace detail

inline Instance parse_biqmac(std::string_view text) {
  Instance inst;
  std::vector<Edge> edges;
  std::optional<std::size_t> declared_edges;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = detail::trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      detail::parse_metadata(line, inst);
      continue;
    }
    auto tok = detail::split_ws(line);
    if (!declared_edges) {
      if (tok.size() != 2) throw ParseError("header must be \"n m\"", line_no);
      auto n = detail::parse_number<std::size_t>(tok[0]);
      auto m = detail::parse_number<std::size_t>(tok[1]);
      if (!n || !m || *n == 0) throw ParseError("malformed header", line_no);
      inst.n = *n;
      declared_edges = *m;
      edges.reserve(*m);
      continue;
    }
    if (tok.size() != 3) throw ParseError("edge line must be \"i j w\"", line_no);
    auto i = detail::parse_number<std::size_t>(tok[0]);
    auto j = detail::parse_number<std::size_t>(tok[1]);
    auto w = detail::parse_number<double>(tok[2]);
    if (!i || !j || !w) throw ParseError("malformed edge line", line_no);
    if (*i < 1 || *i > inst.n || *j < 1 || *j > inst.n) {
      throw ParseError("vertex index out of range [1," + std::to_string(inst.n) + "]", line_no);
    }
    if (*i == *j) throw ParseError("self-loop", line_no);
    if (!std::isfinite(*w)) throw ParseError("non-finite weight", line_no);
    if (edges.size() == *declared_edges) {
      throw ParseError("more edge lines than the declared " + std::to_string(*declared_edges),
                       line_no);
    }
    edges.push_back({std::min(*i, *j) - 1, std::max(*i, *j) - 1, *w});
  }
  if (!declared_edges) throw ParseError("missing header");
  if (edges.size() != *declared_edges) {
    throw ParseError("expected " + std::to_string(*declared_edges) + " edges, found " +
                     std::to_string(edges.size()));
  }
  try {
    return make_instance(inst.n, std::move(edges), std::move(inst.family), inst.seed);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

/// Canonical Biq Mac text. Metadata, when present, goes in a leading comment.
inline std::string serialize_biqmac(const Instance& inst) {
  std::string out;
  if (inst.family || inst.seed) {
    out += "# localspin";
    if (inst.family) out += " family=" + *inst.family;
    if (inst.seed) out += " seed=" + std::to_string(*inst.seed);
    out += '\n';
  }
  out += std::to_string(inst.n) + ' ' + std::to_string(inst.edges.size()) + '\n';
  for (const auto& e : inst.edges) {
    out += std::to_string(e.i + 1);
    out += ' ';
    out += std::to_string(e.j + 1);
    out += ' ';
    out += detail::format_weight(e.w);
    out += '\n';
  }
  return out;
}

// JSON: {"n":..., "edges":[[i,j,w],...], "family":..., "seed":...}, 1-based.

inline void to_json(nlohmann::json& j, const Instance& inst) {
  j = nlohmann::json::object();
  j["n"] = inst.n;
  auto edges = nlohmann::json::array();
  for (const auto& e : inst.edges) edges.push_back({e.i + 1, e.j + 1, e.w});
  j["edges"] = std::move(edges);
  j["family"] = inst.family ? nlohmann::json(*inst.family) : nlohmann::json(nullptr);
  j["seed"] = inst.seed ? nlohmann::json(*inst.seed) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, Instance& inst) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      const auto i = e.at(0).get<std::size_t>();
      const auto k = e.at(1).get<std::size_t>();
      if (i < 1 || k < 1 || i > n || k > n) throw ParseError("vertex index out of range");
      edges.push_back({i - 1, k - 1, e.at(2).get<double>()});
    }
    std::optional<std::string> family;
    std::optional<std::uint64_t> seed;
    if (j.contains("family") && !j["family"].is_null()) family = j["family"].get<std::string>();
    if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::uint64_t>();
    inst = make_instance(n, std::move(edges), std::move(family), seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

}  // namespace localspin
