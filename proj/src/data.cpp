#include "zoprox/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <string_view>

#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>

#include "zoprox/error.hpp"
#include "zoprox/random.hpp"

namespace zoprox {

namespace {

bool is_space(char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\v' || ch == '\f'; }

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_index(std::string_view text, std::uint32_t& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

void parse_line(std::string_view line, std::size_t line_no, std::vector<Row>& rows,
                std::size_t& dim) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) {
    line = line.substr(0, hash);
  }
  Row row;
  bool have_label = false;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && is_space(line[pos])) ++pos;
    if (pos >= line.size()) break;
    const std::size_t start = pos;
    while (pos < line.size() && !is_space(line[pos])) ++pos;
    const std::string_view token = line.substr(start, pos - start);
    const std::size_t column = start + 1;

    if (!have_label) {
      if (!parse_double(token, row.label)) {
        throw ParseError("malformed label '" + std::string(token) + "'", line_no, column);
      }
      have_label = true;
      continue;
    }
    const auto colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("expected <index>:<value>, got '" + std::string(token) + "'", line_no,
                       column);
    }
    Feature f{};
    if (!parse_index(token.substr(0, colon), f.index) || f.index == 0) {
      throw ParseError("feature index must be a positive integer", line_no, column);
    }
    if (!parse_double(token.substr(colon + 1), f.value)) {
      throw ParseError("malformed feature value '" + std::string(token.substr(colon + 1)) + "'",
                       line_no, column + colon + 1);
    }
    if (!row.features.empty() && f.index <= row.features.back().index) {
      throw ParseError("feature indices must be strictly increasing", line_no, column);
    }
    dim = std::max<std::size_t>(dim, f.index);
    row.features.push_back(f);
  }
  if (have_label) rows.push_back(std::move(row));
}

LabelMapping normalize_labels(std::vector<Row>& rows) {
  std::set<double> seen;
  for (const Row& r : rows) seen.insert(r.label);
  auto subset_of = [&](std::initializer_list<double> allowed) {
    return std::all_of(seen.begin(), seen.end(), [&](double v) {
      return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    });
  };
  if (subset_of({-1.0, 1.0})) return LabelMapping::Identity;
  if (subset_of({0.0, 1.0})) {
    for (Row& r : rows) r.label = r.label == 1.0 ? 1.0 : -1.0;
    return LabelMapping::ZeroOne;
  }
  if (subset_of({1.0, 2.0})) {
    for (Row& r : rows) r.label = r.label == 1.0 ? 1.0 : -1.0;
    return LabelMapping::OneTwo;
  }
  std::string listed;
  for (double v : seen) {
    if (!listed.empty()) listed += ", ";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    listed.append(buf, res.ptr);
  }
  throw LabelError("cannot map label set {" + listed + "} to {-1, +1}");
}

Dataset parse_text(std::istream& in, const ParseOptions& options) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    parse_line(line, line_no, data.rows, data.dim);
  }
  if (in.bad()) throw IOError("read error while parsing LIBSVM input");
  data.mapping = options.binary_labels ? normalize_labels(data.rows) : LabelMapping::Raw;
  return data;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string to_string(LabelMapping mapping) {
  switch (mapping) {
    case LabelMapping::Identity:
      return "identity";
    case LabelMapping::ZeroOne:
      return "{0,1}->{-1,+1}";
    case LabelMapping::OneTwo:
      return "{1,2}->{+1,-1}";
    case LabelMapping::Raw:
      return "raw";
  }
  return "?";
}

std::size_t Dataset::nnz() const {
  return std::accumulate(rows.begin(), rows.end(), std::size_t{0},
                         [](std::size_t acc, const Row& r) { return acc + r.features.size(); });
}

Dataset parse_libsvm(std::istream& in, const ParseOptions& options) {
  const int first = in.get();
  if (first == std::char_traits<char>::eof()) {
    in.clear();
    return parse_text(in, options);
  }
  const int second = in.peek();
  in.unget();
  if (first == 0x1f && second == 0x8b) {
    namespace io = boost::iostreams;
    io::filtering_istream gz;
    gz.push(io::gzip_decompressor());
    gz.push(in);
    try {
      return parse_text(gz, options);
    } catch (const io::gzip_error& e) {
      throw IOError(std::string("corrupt gzip input: ") + e.what());
    }
  }
  return parse_text(in, options);
}

Dataset load_libsvm(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  std::string line;
  for (const Row& r : data.rows) {
    line.clear();
    append_number(line, r.label);
    for (const Feature& f : r.features) {
      line += ' ';
      line += std::to_string(f.index);
      line += ':';
      append_number(line, f.value);
    }
    line += '\n';
    out << line;
  }
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw SplitError("split fraction must lie in (0, 1)");
  const std::size_t n = data.size();
  if (n < 2) throw SplitError("need at least two rows to split");
  const auto train_size = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  if (train_size == 0 || train_size == n) {
    throw SplitError("split fraction leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RandomSource rng(seed);
  for (std::size_t k = n - 1; k > 0; --k) std::swap(order[k], order[rng.uniform_index(k + 1)]);

  std::vector<std::size_t> train_ids(order.begin(), order.begin() + static_cast<long>(train_size));
  std::vector<std::size_t> test_ids(order.begin() + static_cast<long>(train_size), order.end());
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());

  auto gather = [&](const std::vector<std::size_t>& ids) {
    Dataset part;
    part.dim = data.dim;
    part.mapping = data.mapping;
    part.rows.reserve(ids.size());
    for (std::size_t i : ids) part.rows.push_back(data.rows[i]);
    return part;
  };
  return {gather(train_ids), gather(test_ids)};
}

DatasetStats stats(const Dataset& data) {
  DatasetStats s;
  s.rows = data.size();
  s.dim = data.dim;
  for (const Row& r : data.rows) {
    s.nnz += r.features.size();
    if (r.label > 0) {
      ++s.positives;
    } else {
      ++s.negatives;
    }
    double sq = 0.0;
    for (const Feature& f : r.features) sq += f.value * f.value;
    s.max_sq_norm = std::max(s.max_sq_norm, sq);
  }
  return s;
}

}  // namespace zoprox
