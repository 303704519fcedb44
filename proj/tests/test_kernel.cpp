#include "doctest.h"
#include "support.hpp"

#include "tuckercheb/kernel.hpp"

#include <cmath>

using namespace tuckercheb;
using namespace testing_support;

TEST_CASE("catalog names round trip") {
  const auto names = kernel_names();
  CHECK(names.size() == 9);
  for (const auto& n : names) CHECK(KernelSpec::named(n).name() == n);
  CHECK_THROWS_AS(KernelSpec::named("cauchy"), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::named("gaussian", 0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::named("gaussian", -1.0), std::invalid_argument);
}

TEST_CASE("kernel values at hand-computed radii") {
  const double s3 = std::sqrt(3.0), s5 = std::sqrt(5.0);
  CHECK(KernelSpec::named("matern32", 2.0).phi(2.0) ==
        doctest::Approx((1.0 + s3) * std::exp(-s3)));
  CHECK(KernelSpec::named("matern52", 1.0).phi(1.0) ==
        doctest::Approx((1.0 + s5 + 5.0 / 3.0) * std::exp(-s5)));
  CHECK(KernelSpec::named("matern12", 0.5).phi(1.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(KernelSpec::named("gaussian", 2.0).phi(1.0) == doctest::Approx(std::exp(-0.25)));
  CHECK(KernelSpec::named("multiquadric", 1.0).phi(1.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(KernelSpec::named("laplace3d").phi(4.0) == doctest::Approx(0.25));
  CHECK(KernelSpec::named("biharmonic").phi(2.0) == doctest::Approx(0.25));
  CHECK(KernelSpec::named("laplace2d").phi(std::exp(1.0)) == doctest::Approx(-1.0));
  CHECK(KernelSpec::named("thinplate").phi(std::exp(1.0)) ==
        doctest::Approx(std::exp(2.0)));
  CHECK(KernelSpec::named("gaussian").phi(0.0) == 1.0);
}

TEST_CASE("singular kernels are flagged") {
  for (const char* n : {"laplace3d", "biharmonic", "laplace2d", "thinplate"}) {
    CHECK(KernelSpec::named(n).singular_at_zero());
  }
  for (const char* n : {"multiquadric", "gaussian", "matern12", "matern32", "matern52"}) {
    CHECK_FALSE(KernelSpec::named(n).singular_at_zero());
    CHECK(std::isfinite(KernelSpec::named(n).phi(0.0)));
  }
}

TEST_CASE("anisotropic distance uses per-dimension scales") {
  KernelSpec k = KernelSpec::named("gaussian", 5.0);
  k.scales = {2.0, 4.0};
  const std::vector<double> x{0.0, 0.0}, y{2.0, 4.0};
  // r = sqrt(1 + 1); sigma is ignored when scales are present.
  CHECK(k(x, y) == doctest::Approx(std::exp(-2.0)));
  k.scales = {1.0, -1.0};
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
  k.scales = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS((void)k(x, y), std::invalid_argument);
}

TEST_CASE("dense kernel matrix against direct evaluation") {
  const Matrix x = random_matrix(7, 3, 1), y = random_matrix(5, 3, 2);
  const KernelSpec k = KernelSpec::named("matern32", 1.3);
  const Matrix kd = dense_kernel_matrix(x, y, k);
  CHECK(kd.rows() == 7);
  CHECK(kd.cols() == 5);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) {
      const double r = (x.row(i) - y.row(j)).norm() / 1.3;
      CHECK(kd(i, j) == doctest::Approx((1 + std::sqrt(3.0) * r) *
                                        std::exp(-std::sqrt(3.0) * r)));
    }
  // Symmetric in its arguments.
  CHECK((dense_kernel_matrix(y, x, k) - kd.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(dense_kernel_matrix(x, x, KernelSpec::named("laplace3d")),
                  std::invalid_argument);
  CHECK_NOTHROW(dense_kernel_matrix(x, x, KernelSpec::named("gaussian")));
  CHECK_THROWS_AS(dense_kernel_matrix(x, random_matrix(2, 2, 3), k), std::invalid_argument);
}
