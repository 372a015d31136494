#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tmd/errors.hpp"
#include "tmd/kernels.hpp"
#include "tmd/matrix.hpp"
#include "tmd/rng.hpp"

using namespace tmd;

namespace {

bool close_rel(double a, double b, double tol) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

std::vector<double> random_vector(SplitMix64& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = lo + (hi - lo) * rng.next_double();
  return v;
}

}  // namespace

TEST_CASE("scalar power_sums match a naive pow loop") {
  SplitMix64 rng(11);
  const std::size_t count = 300;
  std::vector<double> vals = random_vector(rng, count, 0.0, 1.0);
  const std::vector<std::size_t> offsets{0, 7, 7, 130, 300};  // includes an empty segment
  const std::size_t nseg = offsets.size() - 1;
  const std::size_t max_power = 9;

  std::vector<double> out((max_power + 1) * nseg), work(count);
  kern::scalar_backend().power_sums(vals.data(), count, offsets.data(), nseg, max_power,
                                    out.data(), work.data());

  for (std::size_t n = 0; n <= max_power; ++n)
    for (std::size_t j = 0; j < nseg; ++j) {
      double expect = 0.0;
      for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i)
        expect += std::pow(vals[i], static_cast<double>(n));
      CHECK_MESSAGE(close_rel(out[n * nseg + j], expect, 1e-12), "n=", n, " j=", j);
    }
}

TEST_CASE("vector backends agree with the scalar reference") {
  const kern::Backend* simd = kern::avx2_backend();
  if (simd == nullptr) return;  // nothing to compare on this machine

  SplitMix64 rng(29);
  const auto& scalar = kern::scalar_backend();

  SUBCASE("dot") {
    for (std::size_t len : {0u, 1u, 3u, 4u, 17u, 64u, 1001u}) {
      std::vector<double> a = random_vector(rng, len, -1.0, 1.0);
      std::vector<double> b = random_vector(rng, len, -1.0, 1.0);
      CHECK(close_rel(scalar.dot(a.data(), b.data(), len), simd->dot(a.data(), b.data(), len),
                      1e-13));
    }
  }

  SUBCASE("matvec") {
    for (std::size_t rows : {1u, 9u, 17u}) {
      for (std::size_t cols : {1u, 8u, 33u}) {
        std::vector<double> m = random_vector(rng, rows * cols, -1.0, 1.0);
        std::vector<double> x = random_vector(rng, cols, -1.0, 1.0);
        std::vector<double> y1(rows), y2(rows);
        scalar.matvec(m.data(), rows, cols, x.data(), y1.data());
        simd->matvec(m.data(), rows, cols, x.data(), y2.data());
        for (std::size_t r = 0; r < rows; ++r) CHECK(close_rel(y1[r], y2[r], 1e-13));
      }
    }
  }

  SUBCASE("power_sums") {
    const std::size_t count = 4096;
    std::vector<double> vals = random_vector(rng, count, 0.0, 1.0);
    std::vector<std::size_t> offsets{0, 1, 5, 100, 1000, 1003, 4096};
    const std::size_t nseg = offsets.size() - 1;
    const std::size_t max_power = 20;
    std::vector<double> out1((max_power + 1) * nseg), out2((max_power + 1) * nseg), work(count);
    scalar.power_sums(vals.data(), count, offsets.data(), nseg, max_power, out1.data(),
                      work.data());
    simd->power_sums(vals.data(), count, offsets.data(), nseg, max_power, out2.data(),
                     work.data());
    for (std::size_t i = 0; i < out1.size(); ++i) CHECK(close_rel(out1[i], out2[i], 1e-13));
  }
}

TEST_CASE("conditional_matrix is backend independent") {
  const kern::Backend* simd = kern::avx2_backend();
  if (simd == nullptr) return;

  SplitMix64 rng(3);
  std::vector<double> weights = oracles::random_weights(rng, 12);

  kern::select("scalar");
  const ConditionalMatrix a = conditional_matrix(weights, 20);
  kern::select("avx2");
  const ConditionalMatrix b = conditional_matrix(weights, 20);
  kern::select("scalar");

  REQUIRE(a.entries.a.size() == b.entries.a.size());
  for (std::size_t i = 0; i < a.entries.a.size(); ++i)
    CHECK(close_rel(a.entries.a[i], b.entries.a[i], 1e-13));
}

TEST_CASE("backend selection") {
  CHECK(!kern::available().empty());
  CHECK(kern::available().front() == "scalar");
  CHECK_THROWS_AS(kern::select("no-such-backend"), validation_error);
  for (const auto& name : kern::available()) {
    kern::select(name);
    CHECK(std::string(kern::active().name) == name);
  }
  kern::select("scalar");
}
