#include <doctest.h>

#include <cmath>
#include <set>

#include "panelsde/base64.hpp"
#include "panelsde/gaussian.hpp"
#include "panelsde/hash.hpp"
#include "panelsde/linalg.hpp"
#include "panelsde/rng.hpp"

using namespace panelsde;

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(42, 1), b(42, 1), c(42, 2);
    for (int i = 0; i < 100; ++i) {
        const uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
    }
    int same = 0;
    RngStream a2(42, 1);
    for (int i = 0; i < 100; ++i)
        if (a2.next_u64() == c.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("rng uniform lies in (0, 1]") {
    RngStream rng(7);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);
}

TEST_CASE("rng normal moments") {
    RngStream rng(99);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(1.0).scale(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.015));
}

TEST_CASE("normal draws consume exactly two uniforms") {
    RngStream a(5, 3), b(5, 3);
    const double z = a.normal();
    const double u1 = b.uniform();
    const double u2 = b.uniform();
    CHECK(z == doctest::Approx(std::sqrt(-2.0 * std::log(u1)) *
                               std::cos(2.0 * M_PI * u2)).epsilon(1e-12));
    // Counters are in lockstep afterwards.
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams do not overlap their parent") {
    RngStream parent(11, 4);
    RngStream child = parent.derive(0);
    RngStream child2 = parent.derive(1);
    std::set<uint64_t> seen;
    RngStream p2(11, 4);
    for (int i = 0; i < 200; ++i) seen.insert(p2.next_u64());
    int hits = 0;
    for (int i = 0; i < 200; ++i) {
        if (seen.count(child.next_u64())) ++hits;
        if (seen.count(child2.next_u64())) ++hits;
    }
    CHECK(hits == 0);
    // derive is a pure function of (parent identity, sub id).
    CHECK(parent.derive(7).next_u64() == RngStream(11, 4).derive(7).next_u64());
}

TEST_CASE("matrix helpers") {
    Mat a(2, 3);
    a(0, 0) = 1;
    a(0, 1) = 2;
    a(0, 2) = 3;
    a(1, 0) = 4;
    a(1, 1) = 5;
    a(1, 2) = 6;
    const Mat at = mat_transpose(a);
    CHECK(at.rows() == 3);
    CHECK(at(2, 1) == 6);
    const Mat p = mat_mul(a, at);  // 2x2
    CHECK(p(0, 0) == doctest::Approx(14.0));
    CHECK(p(0, 1) == doctest::Approx(32.0));
    CHECK(p(1, 1) == doctest::Approx(77.0));
    const Vec v = mat_vec(a, {1.0, 0.0, -1.0});
    CHECK(v[0] == doctest::Approx(-2.0));
    CHECK(v[1] == doctest::Approx(-2.0));
    CHECK(mat_trace(Mat::identity(4)) == doctest::Approx(4.0));
    CHECK(mat_maxabs(a) == doctest::Approx(6.0));

    Mat s(2, 2);
    s(0, 1) = 1.0;
    CHECK(symmetry_defect(s) == doctest::Approx(1.0));
    CHECK(symmetry_defect(symmetrize(s)) == doctest::Approx(0.0));
}

TEST_CASE("symmetric eigendecomposition: 2x2 oracle") {
    Mat m(2, 2);
    m(0, 0) = 2.0;
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    m(1, 1) = 2.0;
    const EigenSym e = sym_eigendecompose(m);
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-12));
    const double r = 1.0 / std::sqrt(2.0);
    // First non-zero component of each eigenvector is positive.
    CHECK(e.vectors(0, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(e.vectors(1, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(e.vectors(0, 1) == doctest::Approx(r).epsilon(1e-12));
    CHECK(e.vectors(1, 1) == doctest::Approx(-r).epsilon(1e-12));
}

TEST_CASE("symmetric eigendecomposition reconstructs random matrices") {
    RngStream rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 5);
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.normal();
        const EigenSym e = sym_eigendecompose(m);
        for (int i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
        // V Lambda V^T == m and V^T V == I.
        Mat rec(n, n);
        Mat gram(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double r = 0.0, g = 0.0;
                for (int k = 0; k < n; ++k) {
                    r += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
                    g += e.vectors(k, i) * e.vectors(k, j);
                }
                rec(i, j) = r;
                gram(i, j) = g;
            }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                CHECK(rec(i, j) == doctest::Approx(m(i, j)).epsilon(1e-10).scale(1.0));
                CHECK(gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
            }
    }
}

TEST_CASE("eigendecomposition rejects asymmetric input") {
    Mat m(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(sym_eigendecompose(m), SymmetryError);
}

TEST_CASE("psd_sqrt") {
    Mat m(2, 2);
    m(0, 0) = 4.0;
    m(1, 1) = 9.0;
    const Mat r = psd_sqrt(m);
    CHECK(r(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r(0, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    // Square of the root recovers a random PSD matrix.
    RngStream rng(5);
    Mat b(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b(i, j) = rng.normal();
    const Mat psd = mat_mul(b, mat_transpose(b));
    const Mat root = psd_sqrt(psd);
    const Mat sq = mat_mul(root, root);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(sq(i, j) == doctest::Approx(psd(i, j)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("psd_sqrt floors tiny negatives and rejects real ones") {
    Mat tiny(1, 1);
    tiny(0, 0) = -1e-9;  // within tolerance: clamped to the floor
    const Mat r = psd_sqrt(tiny);
    CHECK(r(0, 0) == doctest::Approx(std::sqrt(1e-9)).epsilon(1e-9));

    Mat bad(2, 2);
    bad(0, 0) = 1.0;
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(psd_sqrt(bad), NotPsdError);
}

TEST_CASE("psd_inv_sqrt inverts psd_sqrt") {
    Mat m(2, 2);
    m(0, 0) = 3.0;
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    m(1, 1) = 2.0;
    const Mat prod = mat_mul(psd_sqrt(m), psd_inv_sqrt(m));
    CHECK(prod(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(prod(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(prod(0, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("cholesky solves and log-determinant") {
    Mat m(2, 2);
    m(0, 0) = 4.0;
    m(0, 1) = 2.0;
    m(1, 0) = 2.0;
    m(1, 1) = 3.0;
    const Mat l = cholesky(m);
    CHECK(l(0, 0) == doctest::Approx(2.0));
    CHECK(l(1, 0) == doctest::Approx(1.0));
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(chol_logdet(l) == doctest::Approx(std::log(8.0)).epsilon(1e-12));

    const Vec x = chol_solve(l, {2.0, 5.0});
    // m x = b  =>  x = m^{-1} (2,5) = ((6-10)/8, (20-4)/8) = (-0.5, 2)
    CHECK(x[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));

    Mat sing(2, 2);
    sing(0, 0) = 1.0;
    sing(0, 1) = 1.0;
    sing(1, 0) = 1.0;
    sing(1, 1) = 1.0;
    CHECK_THROWS_AS(cholesky(sing), ConditioningError);
}

TEST_CASE("gaussian log-density oracles") {
    // Standard normal at the mean.
    CHECK(normal_logpdf(0.0, 0.0, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
    // d = 2, identity covariance, offset (1, 1): -ln(2 pi) - 1.
    const Mat cov = Mat::identity(2);
    const double lp = gaussian_logpdf({1.0, 1.0}, {0.0, 0.0}, cov);
    CHECK(lp == doctest::Approx(-2.8378770664093453).epsilon(1e-14));
    // Matches the scalar density product.
    CHECK(lp == doctest::Approx(2.0 * normal_logpdf(1.0, 0.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("gaussian kernel rejects unusable covariance") {
    Mat cov = Mat::identity(2);
    cov(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(gaussian_kernel(cov), DegenerateCovarianceError);

    Mat neg = Mat::identity(2);
    neg(1, 1) = -1.0;
    CHECK_THROWS_AS(gaussian_kernel(neg), DegenerateCovarianceError);
}

TEST_CASE("gaussian kernel reuses its factorization") {
    Mat cov(2, 2);
    cov(0, 0) = 2.0;
    cov(0, 1) = 0.5;
    cov(1, 0) = 0.5;
    cov(1, 1) = 1.0;
    const GaussianKernel k = gaussian_kernel(cov);
    const Vec mean{0.3, -0.2};
    const Vec x{1.0, 0.7};
    CHECK(k.logpdf(x, mean) == doctest::Approx(gaussian_logpdf(x, mean, cov)).epsilon(1e-13));
}

TEST_CASE("base64 round trips") {
    CHECK(base64_encode({'M', 'a', 'n'}) == "TWFu");
    CHECK(base64_encode({'M', 'a'}) == "TWE=");
    CHECK(base64_encode({'M'}) == "TQ==");
    RngStream rng(77);
    std::vector<double> v(37);
    for (auto& x : v) x = rng.normal() * std::pow(10.0, static_cast<double>(rng.next_u64() % 20) - 10.0);
    v.push_back(0.0);
    v.push_back(-0.0);
    v.push_back(std::numeric_limits<double>::min());
    const std::vector<double> back = decode_doubles(encode_doubles(v));
    REQUIRE(back.size() == v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        uint64_t a, b;
        std::memcpy(&a, &v[i], 8);
        std::memcpy(&b, &back[i], 8);
        CHECK(a == b);
    }
    CHECK_THROWS_AS(base64_decode("abc"), ParseError);
    CHECK_THROWS_AS(base64_decode("ab!="), ParseError);
}

TEST_CASE("fnv1a64 standard vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(0xdeadbeefULL) == "00000000deadbeef");
}
