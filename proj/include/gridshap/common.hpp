#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gridshap {

enum class ErrorCode {
  MalformedName,
  MissingLabelColumn,
  EmptyAfterCleaning,
  IoFailure,
  ClassAbsent,
  TooFewRows,
  ColumnMismatch,
  SingleClassInput,
  NonFiniteFeature,
  DimensionMismatch,
  EmptyBackground,
  EmptyInput,
  KOutOfRange,
  LengthMismatch,
  CodeOutOfRange,
  EmptyMatrix,
  UnknownFeature,
  UnknownLabel,
  RowOutOfRange,
  CacheFormat,
  ConfigError,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  std::span<double> row(int r) {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
};

// Deterministic PRNG used for every seeded choice in the library. mt19937_64
// output is pinned by the C++ standard, and the bounded draw below uses
// rejection sampling rather than std::uniform_int_distribution (whose mapping
// is implementation-defined), so shuffles reproduce across platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform draw in [0, n). Unbiased: rejects the low residue band.
  std::uint64_t bounded(std::uint64_t n);

  // Fisher-Yates, high index down.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // First k entries of a Fisher-Yates pass over 0..n-1; order is part of the draw.
  std::vector<int> sample_without_replacement(int n, int k);

private:
  std::mt19937_64 engine_;
};

// Seed stream derivation so sub-stages (background sampling, jitter) do not
// share the split's PRNG sequence.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Locale-free double parse. Accepts an optional leading '+', "inf"/"nan"
// spellings, and rejects trailing garbage. Overflowing values come back as
// +/-infinity so cleaning treats them as non-finite.
std::optional<double> parse_double(std::string_view text);

// Shortest representation that round-trips exactly (std::to_chars).
std::string format_double(double v);

// FNV-1a 64-bit, used for config and output hashes in manifests.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Runs fn(i) for i in [0, n). With threads <= 1 this is a plain loop; the
// parallel path assigns indices via an atomic counter, so fn must write only
// to slot i.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

double sigmoid(double x);
double logit(double p);

}  // namespace gridshap
