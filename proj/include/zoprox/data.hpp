#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace zoprox {

/// One (index, value) pair; indices are 1-based as in the file format.
struct Feature {
  std::uint32_t index;
  double value;

  bool operator==(const Feature&) const = default;
};

struct Row {
  double label = 0.0;
  std::vector<Feature> features;  ///< strictly increasing indices

  bool operator==(const Row&) const = default;
};

/// How raw labels were turned into {-1, +1}.
enum class LabelMapping {
  Identity,  ///< labels already in {-1, +1}
  ZeroOne,   ///< 0 -> -1, 1 -> +1
  OneTwo,    ///< 1 -> +1, 2 -> -1 (covtype.binary)
  Raw,       ///< labels kept as written (multi-class inputs)
};

std::string to_string(LabelMapping mapping);

struct Dataset {
  std::vector<Row> rows;
  /// Largest feature index seen; the problem dimension.
  std::size_t dim = 0;
  LabelMapping mapping = LabelMapping::Identity;

  std::size_t size() const { return rows.size(); }
  std::size_t nnz() const;

  /// Rows and dimension; the label mapping is metadata and does not take part.
  bool operator==(const Dataset& other) const { return dim == other.dim && rows == other.rows; }
};

struct ParseOptions {
  /// Map labels into {-1, +1}. Off for class-index labels (attack examples).
  bool binary_labels = true;
};

/// Streams LIBSVM text (`<label> <idx>:<val> ...`, `#` comments, blank lines skipped).
/// Gzip input is recognised by its magic bytes and decompressed on the fly.
Dataset parse_libsvm(std::istream& in, const ParseOptions& options = {});
Dataset load_libsvm(const std::filesystem::path& path, const ParseOptions& options = {});

/// Writes rows with round-trip precision. Labels are written as stored.
void write_libsvm(std::ostream& out, const Dataset& data);

/// Shuffled split with |train| = round(fraction * n) (halves round up). Both parts keep
/// the full dataset's dimension; rows keep their original relative order.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

struct DatasetStats {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::size_t nnz = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double max_sq_norm = 0.0;
};

DatasetStats stats(const Dataset& data);

}  // namespace zoprox
