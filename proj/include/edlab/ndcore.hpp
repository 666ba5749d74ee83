#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace edlab {

// Cache-line aligned storage. Eigen's vectorised kernels peel by address, so
// without this the summation order (and the last bits) depended on where malloc
// happened to put a buffer, and in-process reruns drifted.
template <class T>
struct AlignedAlloc {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAlloc() = default;
  template <class U>
  AlignedAlloc(const AlignedAlloc<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
  template <class U>
  bool operator==(const AlignedAlloc<U>&) const { return true; }
};

using AlignedVec = std::vector<double, AlignedAlloc<double>>;

/// Row-major dense matrix of doubles. Vectors are stored as n x 1.
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t rows, std::size_t cols, double fill = 0.0);
  Dense(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Dense column(std::vector<double> values);
  static Dense column(std::initializer_list<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  const AlignedVec& values() const { return data_; }
  bool all_finite() const;

  friend bool operator==(const Dense&, const Dense&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  AlignedVec data_;
};

/// Counter-based splitmix64 stream. Draw k of a stream is a pure function of
/// (seed, counter + k), so streams can be replayed or fast-forwarded exactly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// One Box-Muller pair; always consumes exactly two uniforms.
  std::pair<double, double> normal_pair();
  /// Consumes two uniforms and returns the cosine branch.
  double normal();
  /// Fills `out` pairwise; an odd tail still consumes a full pair.
  void fill_normal(std::span<double> out);

  RngStream split(std::string_view label) const;
  RngStream split(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

Dense draw_normal(RngStream& rng, std::size_t n);

/// log(sum(exp(v))) with max-shift. Entries may be -inf; empty input throws.
double logsumexp(std::span<const double> v);
inline double logsumexp(std::initializer_list<double> v) {
  return logsumexp(std::span<const double>(v.begin(), v.size()));
}

enum class Activation { softplus, silu };

struct ActValue {
  double value;
  double dvalue;
};

ActValue act(Activation kind, double u);

double sigmoid(double u);

std::string_view to_string(Activation kind);
Activation activation_from_string(std::string_view name);

}  // namespace edlab
