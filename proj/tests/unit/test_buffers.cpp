#include <cmath>
#include <numeric>
#include <random>

#include "../support.hpp"
#include "chainrisk/buffers.hpp"
#include "doctest.h"

using namespace chainrisk;
using doctest::Approx;
using testsupport::error_code;
using testsupport::uniform;

namespace {

ChainEstimates from_u(const std::vector<double>& u) {
  ChainEstimates c;
  for (double x : u) c.tasks.push_back({10.0 + x, 10.0});
  return c;
}

FeedingSubnetwork sub_with(std::size_t tasks, std::size_t arcs,
                           const std::vector<double>& path_va) {
  FeedingSubnetwork s;
  for (std::size_t i = 1; i <= tasks; ++i) {
    s.tasks.push_back(static_cast<TaskId>(i));
    s.variances[static_cast<TaskId>(i)] = 0.0;
  }
  for (std::size_t i = 0; i < path_va.size(); ++i) {
    s.longest_path.push_back(static_cast<TaskId>(i + 1));
    s.variances[static_cast<TaskId>(i + 1)] = path_va[i];
  }
  s.arc_count = arcs;
  return s;
}

Task task(double mn, double avg, double safe, double mx) {
  Task t;
  t.id = 1;
  t.est_min = mn;
  t.est_avg = avg;
  t.est_safe = safe;
  t.est_max = mx;
  return t;
}

// Variance of triangular(a, c, b) by midpoint quadrature of the density.
double triangular_variance_quadrature(double a, double c, double b) {
  const int n = 200000;
  const double h = (b - a) / n;
  double m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a + (i + 0.5) * h;
    const double f = x < c ? 2 * (x - a) / ((b - a) * (c - a))
                           : 2 * (b - x) / ((b - a) * (b - c));
    m1 += x * f * h;
    m2 += x * x * f * h;
  }
  return m2 - m1 * m1;
}

}  // namespace

TEST_CASE("cut and paste examples") {
  CHECK(cut_paste_buffer(from_u({2, 4, 6})) == 6);
  CHECK(cut_paste_buffer({}) == 0);
  CHECK(cut_paste_buffer(from_u({0})) == 0);
}

TEST_CASE("rsem examples") {
  ChainEstimates one;
  one.tasks.push_back({10, 6});
  CHECK(rsem_buffer(one) == 4);
  CHECK(rsem_buffer(from_u({3, 4})) == 5);
  CHECK(rsem_buffer(from_u({0, 0, 0})) == 0);
  CHECK(rsem_buffer({}) == 0);
}

TEST_CASE("apd examples") {
  CHECK(apd_buffer(sub_with(3, 0, {4, 5})) == 3);  // FC = 1
  CHECK(apd_buffer(sub_with(4, 3, {4, 4})) == Approx(1.75 * std::sqrt(8.0)).epsilon(1e-15));
  CHECK(apd_buffer(sub_with(4, 3, {4, 4})) == Approx(4.9497).epsilon(1e-4));
  CHECK(apd_buffer(sub_with(5, 9, {0, 0, 0})) == 0);
}

TEST_CASE("apd rejects inconsistent sub-networks") {
  FeedingSubnetwork empty;
  CHECK(error_code([&] { apd_buffer(empty); }) == ErrorCode::kInvalidInput);
  auto s = sub_with(2, 1, {1});
  s.longest_path.push_back(7);  // not a member
  CHECK(error_code([&] { apd_buffer(s); }) == ErrorCode::kInvalidInput);
  s = sub_with(2, 1, {1});
  s.variances[1] = -1;
  CHECK(error_code([&] { apd_buffer(s); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("activity variance") {
  CHECK(activity_variance(task(6, 6, 10, 10)) == 4);
  CHECK(activity_variance(task(6, 6, 6, 6)) == 0);
  CHECK(activity_variance(task(5, 5, 5, 5), VarianceModel::kTriangular) == 0);
  CHECK(activity_variance(task(0, 0.5, 1, 1), VarianceModel::kTriangular) ==
        Approx(1.0 / 24).epsilon(1e-14));
  std::mt19937_64 rng(31);
  for (int k = 0; k < 20; ++k) {
    const double a = uniform(rng, 0, 10), b = a + uniform(rng, 0.5, 10),
                 c = uniform(rng, a + 0.01, b - 0.01);
    const double v = activity_variance(task(a, c, b, b), VarianceModel::kTriangular);
    CHECK(v == Approx((a * a + b * b + c * c - a * b - a * c - b * c) / 18).epsilon(1e-12));
    CHECK(v == Approx(triangular_variance_quadrature(a, c, b)).epsilon(1e-6));
  }
}

TEST_CASE("method and variance names") {
  CHECK(parse_buffer_method("cpm") == BufferMethod::kCutPaste);
  CHECK(parse_buffer_method("rsem") == BufferMethod::kRsem);
  CHECK(parse_buffer_method("apd") == BufferMethod::kApd);
  CHECK(to_string(BufferMethod::kCutPaste) == "cpm");
  CHECK(error_code([] { parse_buffer_method("magic"); }) == ErrorCode::kUnknownMethod);
  CHECK(parse_variance_model("triangular") == VarianceModel::kTriangular);
  CHECK(to_string(VarianceModel::kRsemHalfU) == "rsem_half_u");
  CHECK(error_code([] { parse_variance_model("normal"); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("property: rsem bounds") {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> u(static_cast<std::size_t>(testsupport::uniform_int(rng, 2, 30)));
    for (auto& x : u) x = uniform(rng, 0.01, 10);
    const auto c = from_u(u);
    const double rs = rsem_buffer(c);
    CHECK(rs < 2 * cut_paste_buffer(c));
    CHECK(rs <= std::accumulate(u.begin(), u.end(), 0.0) + 1e-12);
    CHECK(rs >= *std::max_element(u.begin(), u.end()) - 1e-12);
  }
}

TEST_CASE("property: linear vs square-root growth with chain length") {
  for (int n = 1; n <= 64; ++n) {
    const auto c = from_u(std::vector<double>(static_cast<std::size_t>(n), 1.0));
    CHECK(cut_paste_buffer(c) == n / 2.0);
    CHECK(rsem_buffer(c) == Approx(std::sqrt(n)).epsilon(1e-15));
  }
}

TEST_CASE("property: apd monotone in arcs and path variance, blind to off-path tasks") {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 500; ++k) {
    const std::size_t len = static_cast<std::size_t>(testsupport::uniform_int(rng, 1, 10));
    std::vector<double> va(len);
    for (auto& v : va) v = uniform(rng, 0, 5);
    const std::size_t tasks = len + static_cast<std::size_t>(testsupport::uniform_int(rng, 0, 5));
    const std::size_t arcs = static_cast<std::size_t>(testsupport::uniform_int(rng, 0, 20));
    const auto base = sub_with(tasks, arcs, va);
    const double b = apd_buffer(base);
    CHECK(apd_buffer(sub_with(tasks, arcs + 1, va)) >= b);
    auto more = va;
    more[static_cast<std::size_t>(testsupport::uniform_int(rng, 0, static_cast<int>(len) - 1))] +=
        uniform(rng, 0, 3);
    CHECK(apd_buffer(sub_with(tasks, arcs, more)) >= b);
    // Off-path variances do not enter the sum.
    auto off = base;
    for (std::size_t i = len + 1; i <= tasks; ++i) off.variances[static_cast<TaskId>(i)] = 99;
    CHECK(apd_buffer(off) == b);
  }
}

TEST_CASE("property: every method is zero without safety") {
  std::mt19937_64 rng(34);
  for (int k = 0; k < 100; ++k) {
    const auto c = from_u(std::vector<double>(
        static_cast<std::size_t>(testsupport::uniform_int(rng, 0, 10)), 0.0));
    CHECK(cut_paste_buffer(c) == 0);
    CHECK(rsem_buffer(c) == 0);
    const std::vector<double> zeros(std::max<std::size_t>(1, c.tasks.size()), 0.0);
    CHECK(apd_buffer(sub_with(zeros.size() + 2, 7, zeros)) == 0);
  }
}
