#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lightray/linalg.hpp"
#include "lightray/util.hpp"

using namespace lightray;

TEST_CASE("determinant and inverse on small matrices") {
  Mat m(3);
  m(0, 0) = 2; m(0, 1) = 1; m(0, 2) = 0;
  m(1, 0) = 1; m(1, 1) = 3; m(1, 2) = 1;
  m(2, 0) = 0; m(2, 1) = 1; m(2, 2) = 4;
  CHECK(determinant(m) == doctest::Approx(18.0));  // 2*(12-1) - 1*4
  const Mat inv = inverse(m);
  const Mat id = mul(m, inv);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("cholesky reproduces the matrix") {
  Mat h(2);
  h(0, 0) = 0.75; h(0, 1) = 0.1;
  h(1, 0) = 0.1;  h(1, 1) = 1.0;
  const Mat l = cholesky(h);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int k = 0; k < 2; ++k) s += l(i, k) * l(j, k);
      CHECK(s == doctest::Approx(h(i, j)).epsilon(1e-14));
    }
  Mat bad(2);
  bad(0, 0) = 1; bad(1, 1) = -1;
  CHECK_THROWS_AS(cholesky(bad), NotSpacelikeError);
}

TEST_CASE("symmetric eigenvalues ascending with orthonormal vectors") {
  Mat m(3);
  m(0, 0) = 4; m(0, 1) = 1; m(0, 2) = 0;
  m(1, 0) = 1; m(1, 1) = 3; m(1, 2) = 1;
  m(2, 0) = 0; m(2, 1) = 1; m(2, 2) = 2;
  Vec vals;
  Mat vecs;
  sym_eigen(m, vals, &vecs);
  CHECK(vals[0] < vals[1]);
  CHECK(vals[1] < vals[2]);
  // trace and determinant invariants
  CHECK(vals[0] + vals[1] + vals[2] == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(vals[0] * vals[1] * vals[2] == doctest::Approx(determinant(m)).epsilon(1e-12));
  // eigenvector residuals
  for (int k = 0; k < 3; ++k) {
    Vec v(3);
    for (int i = 0; i < 3; ++i) v[i] = vecs(i, k);
    const Vec mv = mul(m, v);
    for (int i = 0; i < 3; ++i) CHECK(mv[i] == doctest::Approx(vals[k] * v[i]).epsilon(1e-10));
  }
}

TEST_CASE("symmetric square root squares back") {
  Mat h(2);
  h(0, 0) = 2.0; h(0, 1) = 0.3;
  h(1, 0) = 0.3; h(1, 1) = 0.5;
  const Mat r = sym_sqrt(h);
  const Mat rr = mul(r, r);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(rr(i, j) == doctest::Approx(h(i, j)).epsilon(1e-12));
  const Mat rinv = sym_sqrt(h, /*invert=*/true);
  const Mat id = mul(r, rinv);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("pairwise sum is exact-ish and shape-stable") {
  std::vector<double> xs(1000);
  for (size_t i = 0; i < xs.size(); ++i) xs[i] = 1.0 / static_cast<double>(i + 1);
  const double s = pairwise_sum(xs);
  // harmonic number H_1000
  double ref = 0;
  for (size_t i = xs.size(); i > 0; --i) ref += 1.0 / static_cast<double>(i);
  CHECK(s == doctest::Approx(ref).epsilon(1e-15));

  // A naive accumulator absorbs every tail term below the leading ulp; the
  // compensated tree keeps them.
  std::vector<double> ys(100001, 1e-16);
  ys[0] = 1.0;
  double naive = 0.0;
  for (double y : ys) naive += y;
  CHECK(naive == 1.0);  // each 1e-16 rounds away against 1.0
  CHECK(pairwise_sum(ys) == doctest::Approx(1.0 + 1e-11).epsilon(1e-13));
}

TEST_CASE("parallel_for fills every slot once, any worker count") {
  const int n = 1000;
  for (int workers : {1, 3, 7}) {
    std::vector<int> hits(n, 0);
    parallel_for(n, workers, [&](std::int64_t i) { hits[static_cast<size_t>(i)] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
}
