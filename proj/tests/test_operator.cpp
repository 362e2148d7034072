#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <set>

#include "pmorph/io.hpp"
#include "pmorph/simulate.hpp"  // SeededRng
#include "pmorph/vladimirov.hpp"

using namespace pmorph;

namespace {

Eigen::VectorXd random_vector(SeededRng& rng, std::int64_t n) {
  Eigen::VectorXd v(n);
  for (std::int64_t i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("operator constants") {
  // p=2, alpha=1: C = (1-2)/(1-1/4) = -4/3, lambda_0 = (1/2)/(3/4) = 2/3
  OperatorConstants k(2, 0, 1.0);
  CHECK(k.C_alpha == Catch::Approx(-4.0 / 3.0).epsilon(1e-15));
  CHECK(k.lambda_M == Catch::Approx(2.0 / 3.0).epsilon(1e-15));

  for (int p : {2, 3, 5}) {
    for (double alpha : {0.5, 1.0, 2.0}) {
      for (int M : {-1, 0, 1, 2}) {
        OperatorConstants c(p, M, alpha);
        CHECK(c.C_alpha < 0.0);
        CHECK(c.lambda_M > 0.0);
        OperatorConstants next(p, M + 1, alpha);
        CHECK(next.lambda_M ==
              Catch::Approx(std::pow(p, -alpha) * c.lambda_M).epsilon(1e-14));
      }
    }
  }
  CHECK_THROWS_AS(OperatorConstants(2, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(OperatorConstants(2, 0, -1.0), std::invalid_argument);
}

TEST_CASE("hand-assembled 2x2 matrix for p=2, M=0, L=1, alpha=1") {
  GridGeometry g(2, 0, 1);
  VladimirovOperator op(g, 1.0);
  const Eigen::MatrixXd& A = op.dense();
  CHECK(A(0, 0) == Catch::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(A(1, 1) == Catch::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(A(0, 1) == Catch::Approx(-2.0 / 3.0).epsilon(1e-15));
  CHECK(A(1, 0) == Catch::Approx(-2.0 / 3.0).epsilon(1e-15));

  // eigenvectors: (1,1) -> lambda_M, (1,-1) -> p^{(1-0)*1} = 2
  Eigen::Vector2d ones(1.0, 1.0), alt(1.0, -1.0);
  Eigen::VectorXd r1 = A * ones, r2 = A * alt;
  CHECK((r1 - (2.0 / 3.0) * ones).norm() < 1e-14);
  CHECK((r2 - 2.0 * alt).norm() < 1e-14);
}

TEST_CASE("dense matrix is exactly symmetric with shell-structured entries") {
  GridGeometry g(3, 1, 2);
  VladimirovOperator op(g, 0.7);
  const Eigen::MatrixXd& A = op.dense();
  CHECK(A == A.transpose().eval());

  // entries depend only on |K - I|_p; number of distinct off-diagonal values
  // equals L+M
  std::set<double> values;
  for (std::int64_t k = 0; k < g.N; ++k)
    for (std::int64_t i = 0; i < g.N; ++i)
      if (k != i) values.insert(A(k, i));
  CHECK(static_cast<int>(values.size()) == g.levels());

  for (std::int64_t k = 0; k < g.N; ++k)
    for (std::int64_t i = 0; i < g.N; ++i)
      if (k != i)
        CHECK(A(k, i) == op.shell_coefficient(distance_level(g, k, i)));
}

TEST_CASE("constant vector is an eigenvector with eigenvalue lambda_M") {
  for (auto [p, M, L] : {std::tuple<int, int, int>{2, 0, 4}, {3, 1, 2}, {5, 0, 2}}) {
    GridGeometry g(p, M, L);
    VladimirovOperator op(g, 1.3);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.N);
    Eigen::VectorXd r = op.apply_dense(ones);
    CHECK((r - op.constants().lambda_M * ones).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sampled wavelets are eigenvectors: A psi = p^{(1-r)alpha} psi") {
  for (auto [p, M, L] : {std::tuple<int, int, int>{2, 0, 3}, {3, 1, 2}}) {
    GridGeometry g(p, M, L);
    for (double alpha : {0.5, 1.0, 2.0}) {
      VladimirovOperator op(g, alpha);
      for (const WaveletIndex& w : admissible_wavelets(g)) {
        Eigen::VectorXd psi = sample_real_mode(w, WaveletPhase::cos, g);
        double kappa = wavelet_eigenvalue(p, alpha, w.r);
        Eigen::VectorXd r = op.apply_dense(psi);
        CHECK((r - kappa * psi).norm() <= 1e-10 * psi.norm());
      }
    }
  }
}

TEST_CASE("apply_dense basics") {
  GridGeometry g(2, 1, 3);
  VladimirovOperator op(g, 1.0);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.N);
  CHECK(op.apply_dense(zero).norm() == 0.0);
  CHECK_THROWS_AS(op.apply_dense(Eigen::VectorXd::Zero(g.N + 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(op.apply_fast(Eigen::VectorXd::Zero(g.N - 1)),
                  std::invalid_argument);
}

TEST_CASE("apply_fast equals apply_dense on random vectors") {
  SeededRng rng(99);
  for (auto [p, M, L] : {std::tuple<int, int, int>{2, 0, 8}, {3, 1, 3}, {5, 1, 2}}) {
    GridGeometry g(p, M, L);
    VladimirovOperator op(g, 0.8);
    for (int trial = 0; trial < (g.N >= 256 ? 100 : 20); ++trial) {
      Eigen::VectorXd v = random_vector(rng, g.N);
      Eigen::VectorXd a = op.apply_dense(v);
      Eigen::VectorXd b = op.apply_fast(v);
      CHECK((a - b).norm() <= 1e-12 * a.norm());
    }
  }
}

TEST_CASE("apply_fast is identical across thread counts") {
  GridGeometry g(2, 0, 8);
  VladimirovOperator op(g, 1.0);
  SeededRng rng(5);
  Eigen::VectorXd v = random_vector(rng, g.N);
  set_thread_count(1);
  Eigen::VectorXd r1 = op.apply_fast(v);
  set_thread_count(4);
  Eigen::VectorXd r4 = op.apply_fast(v);
  set_thread_count(1);
  CHECK(r1 == r4);
}

TEST_CASE("analytic spectrum examples") {
  // p=2, M=0, L=2, alpha=1 -> {2/3 x1, 2 x1, 4 x2}
  SpectrumReport rep = analytic_spectrum(GridGeometry(2, 0, 2), 1.0);
  REQUIRE(rep.lines.size() == 3);
  CHECK(rep.lines[0].value == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rep.lines[0].multiplicity == 1);
  CHECK(rep.lines[0].label == "constant");
  CHECK(rep.lines[1].value == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(rep.lines[1].multiplicity == 1);
  CHECK(rep.lines[2].value == Catch::Approx(4.0).epsilon(1e-15));
  CHECK(rep.lines[2].multiplicity == 2);

  // p=3, M=1, L=1, alpha=2 -> {1/13 x1, 1 x2 (r=1), 9 x6 (r=0)}
  SpectrumReport rep3 = analytic_spectrum(GridGeometry(3, 1, 1), 2.0);
  REQUIRE(rep3.lines.size() == 3);
  CHECK(rep3.lines[0].value == Catch::Approx(1.0 / 13.0).epsilon(1e-15));
  CHECK(rep3.lines[1].value == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(rep3.lines[1].multiplicity == 2);
  CHECK(rep3.lines[2].value == Catch::Approx(9.0).epsilon(1e-15));
  CHECK(rep3.lines[2].multiplicity == 6);

  // multiplicities always sum to N
  for (auto [p, M, L] : {std::tuple<int, int, int>{2, 2, 3}, {3, 0, 4}, {5, 1, 2}}) {
    GridGeometry g(p, M, L);
    std::int64_t total = 0;
    for (const auto& line : analytic_spectrum(g, 0.5).lines)
      total += line.multiplicity;
    CHECK(total == g.N);
  }
}

TEST_CASE("verify_spectrum matches the analytic multiset") {
  // exact 2-point case
  SpectrumReport tiny = verify_spectrum(VladimirovOperator(GridGeometry(2, 0, 1), 1.0));
  CHECK(tiny.matched);

  // p=2, M=0, L=3, alpha=0.5 -> {lambda_M, 2^0.5, 2^1 x2, 2^1.5 x4}
  GridGeometry g(2, 0, 3);
  VladimirovOperator op(g, 0.5);
  SpectrumReport rep = verify_spectrum(op);
  CHECK(rep.matched);
  CHECK(rep.max_relative_deviation < 1e-8);
  CHECK(rep.max_wavelet_residual < 1e-10);

  // sweep over p, L+M <= 5, alpha
  for (int p : {2, 3, 5}) {
    for (int total : {2, 3}) {
      for (double alpha : {0.5, 1.0, 2.0}) {
        GridGeometry gg(p, 1, total - 1);
        SpectrumReport r = verify_spectrum(VladimirovOperator(gg, alpha));
        CHECK(r.matched);
        CHECK(r.max_wavelet_residual < 1e-10);
      }
    }
  }
}

TEST_CASE("spectrum is strictly positive with lambda_M at the floor") {
  GridGeometry g(3, 1, 2);
  VladimirovOperator op(g, 1.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense(), Eigen::EigenvaluesOnly);
  double floor = std::min(op.constants().lambda_M,
                          wavelet_eigenvalue(g.p, 1.5, g.M));
  CHECK(es.eigenvalues()(0) > 0.0);
  CHECK(es.eigenvalues()(0) >= floor - 1e-12);
  CHECK(es.eigenvalues()(0) == Catch::Approx(op.constants().lambda_M).epsilon(1e-10));
}

TEST_CASE("paper-literal assembly trips the spectrum check") {
  GridGeometry g(2, 0, 2);
  OperatorOptions opt;
  opt.paper_literal = true;
  SpectrumReport rep = verify_spectrum(VladimirovOperator(g, 1.0, opt));
  CHECK_FALSE(rep.matched);
  CHECK_FALSE(rep.mismatches.empty());
}

TEST_CASE("dense cap: fast path stays available") {
  GridGeometry g(2, 0, 6);  // N = 64
  OperatorOptions opt;
  opt.dense_cap = 32;
  VladimirovOperator op(g, 1.0, opt);
  CHECK_THROWS_AS(op.dense(), std::length_error);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.N);
  Eigen::VectorXd r = op.apply_fast(ones);
  CHECK((r - op.constants().lambda_M * ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matrix exponential: semigroup positivity and row sums") {
  GridGeometry g(2, 1, 3);
  VladimirovOperator op(g, 1.0);
  for (double t : {0.1, 1.0}) {
    Eigen::MatrixXd E = op.expm_dense(t);
    CHECK(E.minCoeff() >= -1e-12);
    // A 1 = lambda_M 1, so exp(-tA) 1 = exp(-t lambda_M) 1
    Eigen::VectorXd rowsum = E * Eigen::VectorXd::Ones(g.N);
    double want = std::exp(-t * op.constants().lambda_M);
    CHECK((rowsum.array() - want).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("solve_shifted inverts I + cA") {
  GridGeometry g(3, 0, 2);
  VladimirovOperator op(g, 0.9);
  SeededRng rng(11);
  Eigen::VectorXd b = random_vector(rng, g.N);
  Eigen::VectorXd x = op.solve_shifted(0.25, b);
  Eigen::VectorXd back = x + 0.25 * op.apply_dense(x);
  CHECK((back - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("dalpha_on_indicator closed form") {
  // inside the ball: lambda_M (= 2/3 for p=2, alpha=1, M=0)
  CHECK(dalpha_on_indicator(Rational(0), 0, 1.0, 2) ==
        Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(dalpha_on_indicator(Rational(1), 0, 1.0, 2) ==
        Catch::Approx(2.0 / 3.0).epsilon(1e-15));
  // outside: strictly negative, with |x|^{alpha+1}-scaling constant in x
  double prev_scaled = 0;
  for (int beta = 1; beta <= 4; ++beta) {
    Rational x = rational_pow(2, -beta);  // |x|_2 = 2^beta
    double val = dalpha_on_indicator(x, 0, 1.0, 2);
    CHECK(val < 0.0);
    double norm_x = std::pow(2.0, beta);
    double scaled = val * std::pow(norm_x, 2.0);
    if (beta > 1) CHECK(scaled == Catch::Approx(prev_scaled).epsilon(1e-12));
    prev_scaled = scaled;
  }
  // agreement with the assembled diagonal identity on the whole-ball indicator:
  // row sums give A*1 = lambda_M*1, matching the first branch
  GridGeometry g(3, 1, 1);
  VladimirovOperator op(g, 2.0);
  CHECK(dalpha_on_indicator(Rational(1, 3), 1, 2.0, 3) ==
        Catch::Approx(op.constants().lambda_M).epsilon(1e-14));
}

TEST_CASE("matrix export round-trips") {
  GridGeometry g(2, 0, 2);
  VladimirovOperator op(g, 1.0);
  std::string bytes = matrix_binary(op.dense());
  CHECK(bytes.size() == 8 + 16 * sizeof(double));
  CHECK(bytes.substr(0, 6) == std::string("PADOP\0", 6));
  Eigen::MatrixXd back = matrix_from_binary(bytes);
  CHECK(back == op.dense());

  std::string csv = matrix_csv(op.dense());
  CHECK(csv.rfind("row,col,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + g.N * g.N);
}

TEST_CASE("fast matvec scales sub-quadratically") {
  // cost ratio when doubling N should approach p, not p^2
  GridGeometry small(2, 0, 11), big(2, 0, 12);  // N = 2048, 4096
  VladimirovOperator op_small(small, 1.0), op_big(big, 1.0);
  SeededRng rng(17);
  Eigen::VectorXd vs = random_vector(rng, small.N);
  Eigen::VectorXd vb = random_vector(rng, big.N);
  auto time_of = [](const VladimirovOperator& op, const Eigen::VectorXd& v) {
    volatile double sink = 0;
    Eigen::VectorXd r = op.apply_fast(v);  // warm up
    sink = sink + r(0);
    double best = 1e300;
    for (int rep = 0; rep < 5; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      for (int i = 0; i < 40; ++i) {
        r = op.apply_fast(v);
        sink = sink + r(0);
      }
      auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  double ratio = time_of(op_big, vb) / time_of(op_small, vs);
  CHECK(ratio < std::pow(2.0, 1.5));
}
