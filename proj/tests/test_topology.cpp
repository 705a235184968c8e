#include <doctest.h>

#include "orthoconv/errors.hpp"
#include "orthoconv/linalg.hpp"
#include "orthoconv/param.hpp"
#include "orthoconv/rng.hpp"
#include "orthoconv/topology.hpp"

#include "fixtures.hpp"

#include <cmath>

using namespace orthoconv;
using namespace orthoconv::topo;
using conv::Kernel1D;
using conv::Kernel2D;

namespace {

std::vector<Matrix> random_projectors(int n, int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Matrix> out;
    for (int i = 0; i < count; ++i) {
        const int rank = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
        if (rank == n) {
            out.push_back(Matrix::identity(n));
        } else {
            out.push_back(linalg::projector_from_raw(random_matrix(n, rank, rng)));
        }
    }
    return out;
}

} // namespace

TEST_CASE("decomposition coefficients") {
    CHECK(decomposition_coefficient(3, 1, 0) == -2);
    for (int k = 1; k <= 5; ++k)
        for (int j = 0; j < k; ++j) CHECK(decomposition_coefficient(k, j, j) == 1);
    CHECK(decomposition_coefficient(4, 0, 2) == 0);
    CHECK_THROWS_AS(decomposition_coefficient(3, 3, 0), PreconditionError);
    CHECK_THROWS_AS(decomposition_coefficient(3, -1, 0), PreconditionError);
}

TEST_CASE("b_direct: closed forms") {
    Rng rng(8);
    const Matrix h = linalg::orthogonalize(random_matrix(3, 3, rng));
    const std::vector<Matrix> ps = random_projectors(3, 2, 9);

    // k = K-1: every factor replaced by I
    CHECK(max_abs_diff(b_direct(h, ps, 2), h) < 1e-14);
    // K = 2: B_0 = H P_1
    CHECK(max_abs_diff(b_direct(h, {ps[0]}, 0), h * ps[0]) < 1e-14);
    // K = 3: B_1 = H (P_1 + P_2)
    CHECK(max_abs_diff(b_direct(h, ps, 1), h * (ps[0] + ps[1])) < 1e-12);
}

TEST_CASE("kernel element decomposition identity (Lemma)") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed + 30);
        const int n = 2 + static_cast<int>(seed % 3); // n <= 4
        const int k = 2 + static_cast<int>(seed % 3); // K <= 4
        const Matrix h = linalg::orthogonalize(random_matrix(n, n, rng));
        const std::vector<Matrix> ps = random_projectors(n, k - 1, seed + 101);
        const Kernel1D kernel = param::bcop_1d(h, ps);
        for (int j = 0; j < k; ++j) {
            Matrix sum = Matrix::zero(n, n);
            for (int i = 0; i <= j; ++i)
                sum += static_cast<double>(decomposition_coefficient(k, j, i)) * b_direct(h, ps, i);
            CHECK(frobenius_norm(kernel.taps[static_cast<std::size_t>(j)] - sum) < 1e-9);
        }
    }
}

TEST_CASE("b_sequence_from_kernel: K=1 and K=2 closed forms") {
    Rng rng(2);
    const Matrix h = linalg::orthogonalize(random_matrix(2, 2, rng));
    const auto b1 = b_sequence_from_kernel(conv::single_tap_kernel(h));
    REQUIRE(b1.size() == 1);
    CHECK(max_abs_diff(b1[0], h) == 0.0);

    const Kernel1D k2 = conv::make_kernel1d(2, 2, {Matrix{{1.0, 0.0}, {0.0, 0.0}},
                                                   Matrix{{0.0, 0.0}, {0.0, 1.0}}});
    const auto b2 = b_sequence_from_kernel(k2);
    REQUIRE(b2.size() == 2);
    CHECK(max_abs_diff(b2[0], k2.taps[0]) == 0.0);
    CHECK(max_abs_diff(b2[1], k2.taps[1] + k2.taps[0]) == 0.0);
}

TEST_CASE("triangular map round-trips through b_direct") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed + 55);
        const int n = 3;
        const int k = 4;
        const Matrix h = linalg::orthogonalize(random_matrix(n, n, rng));
        const std::vector<Matrix> ps = random_projectors(n, k - 1, seed + 200);
        const Kernel1D kernel = param::bcop_1d(h, ps);
        const auto b = b_sequence_from_kernel(kernel);
        for (int j = 0; j < k; ++j)
            CHECK(frobenius_norm(b[static_cast<std::size_t>(j)] - b_direct(h, ps, j)) < 1e-9);
    }
}

TEST_CASE("recover_h") {
    Rng rng(10);
    const Matrix h = linalg::orthogonalize(random_matrix(3, 3, rng));
    CHECK(max_abs_diff(recover_h(conv::single_tap_kernel(h)), h) == 0.0);

    const std::vector<Matrix> ps = random_projectors(3, 2, 77);
    const Kernel1D kernel = param::bcop_1d(h, ps);
    CHECK(max_abs_diff(recover_h(kernel), h) < 1e-10);

    const Kernel1D diag = conv::make_kernel1d(2, 2, {Matrix{{1.0, 0.0}, {0.0, 0.0}},
                                                     Matrix{{0.0, 0.0}, {0.0, 1.0}}});
    CHECK(max_abs_diff(recover_h(diag), Matrix::identity(2)) == 0.0);

    // far-from-orthogonal sum is flagged
    const Kernel1D bad = conv::make_kernel1d(2, 2, {Matrix{{0.3, 0.0}, {0.0, 0.2}},
                                                    Matrix{{0.1, 0.0}, {0.0, 0.0}}});
    CHECK_THROWS_AS(recover_h(bad), InvalidKernelError);
}

TEST_CASE("sock_invariant equals the generating rank sum") {
    const auto s1 = param::sock_with_ranks(4, {1, 2}, 5);
    CHECK(std::abs(sock_invariant(s1.kernel) - 3.0) < 1e-6);

    const auto s2 = param::sock_with_ranks(3, {0, 0}, 6);
    CHECK(std::abs(sock_invariant(s2.kernel)) < 1e-6);

    const auto s3 = param::sock_with_ranks(3, {3, 3, 3}, 7);
    CHECK(std::abs(sock_invariant(s3.kernel) - 9.0) < 1e-6);

    // K = 1 defined as 0
    Rng rng(1);
    const Matrix h = linalg::orthogonalize(random_matrix(2, 2, rng));
    CHECK(sock_invariant(conv::single_tap_kernel(h)) == 0.0);
}

TEST_CASE("sock_invariant separates different rank sums") {
    const auto a = param::sock_with_ranks(4, {2, 1}, 11);
    const auto b = param::sock_with_ranks(4, {2, 2}, 11);
    CHECK(std::abs(sock_invariant(a.kernel) - 3.0) < 1e-6);
    CHECK(std::abs(sock_invariant(b.kernel) - 4.0) < 1e-6);
}

TEST_CASE("sock_invariant rejects non-orthogonal kernels") {
    const Kernel1D bad = conv::make_kernel1d(2, 2, {Matrix{{0.7, 0.0}, {0.0, 0.7}},
                                                    Matrix{{0.1, 0.0}, {0.0, 0.1}}});
    CHECK_THROWS_AS(sock_invariant(bad), InvalidKernelError);
}

TEST_CASE("sock_invariant is constant along a continuous parameter path") {
    // interpolate between two rank-(1,2) projector tuples through the
    // projector manifold: rebuild the kernel at every step from valid factors
    Rng rng(21);
    const int n = 4;
    const Matrix h = linalg::orthogonalize(random_matrix(n, n, rng));
    const Matrix r1a = random_matrix(n, 1, rng);
    const Matrix r1b = random_matrix(n, 1, rng);
    const Matrix r2a = random_matrix(n, 2, rng);
    const Matrix r2b = random_matrix(n, 2, rng);
    double reference = -1.0;
    for (int t = 0; t <= 100; ++t) {
        const double alpha = static_cast<double>(t) / 100.0;
        // generic interpolation keeps full column rank along the path
        const Matrix p1 = linalg::projector_from_raw((1.0 - alpha) * r1a + alpha * r1b);
        const Matrix p2 = linalg::projector_from_raw((1.0 - alpha) * r2a + alpha * r2b);
        const double g = sock_invariant(param::bcop_1d(h, {p1, p2}));
        if (t == 0) reference = g;
        CHECK(std::abs(g - reference) < 1e-6);
    }
    CHECK(std::abs(reference - 3.0) < 1e-6);
}

TEST_CASE("component_signature_2x2: counterexample fixture") {
    const Kernel2D fixture = fixtures::incomplete_2d_kernel();
    const Signature2x2 sig = component_signature_2x2(fixture);
    CHECK(sig.det_sign == 1);
    CHECK(sig.p == 1);
    CHECK(sig.q == 1);
    CHECK(sig.reliable);

    // the signature projectors are exactly the generating P and Q
    Matrix sum = Matrix::zero(2, 2);
    for (const auto& b : fixture.blocks) sum += b;
    const Matrix ht = transpose(sum);
    CHECK(max_abs_diff(ht * fixture.block(0, 0) + ht * fixture.block(0, 1),
                       fixtures::incomplete_p()) < 1e-12);
    CHECK(max_abs_diff(ht * fixture.block(0, 0) + ht * fixture.block(1, 0),
                       fixtures::incomplete_q()) < 1e-12);
}

TEST_CASE("component_signature_2x2: embedded 1x1 kernel has full-rank sums") {
    Rng rng(31);
    const Matrix h = linalg::orthogonalize(random_matrix(3, 3, rng));
    std::vector<Matrix> blocks = {h, Matrix::zero(3, 3), Matrix::zero(3, 3), Matrix::zero(3, 3)};
    const Kernel2D k = conv::make_kernel2d(3, 3, 2, 2, std::move(blocks));
    const Signature2x2 sig = component_signature_2x2(k);
    CHECK(sig.p == 3);
    CHECK(sig.q == 3);
    CHECK((sig.det_sign == 1 || sig.det_sign == -1));
    CHECK(sig.det_sign == det_sign(h));
}

TEST_CASE("component_signature_2x2 recovers generating projector ranks") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Rng rng(seed + 70);
        const int n = 3;
        param::BcopFactors f;
        f.h = linalg::orthogonalize(random_matrix(n, n, rng));
        const int rp = 1 + static_cast<int>(seed % 2);
        const int rq = 1 + static_cast<int>((seed / 2) % 2);
        f.p = {linalg::projector_from_raw(random_matrix(n, rp, rng))};
        f.q = {linalg::projector_from_raw(random_matrix(n, rq, rng))};
        const Kernel2D k = param::bcop_from_factors(f);
        const Signature2x2 sig = component_signature_2x2(k);
        CHECK(sig.p == rp);
        CHECK(sig.q == rq);
    }
}

TEST_CASE("component_signature_2x2 is constant along a BCOP parameter path") {
    Rng rng(90);
    const int n = 3;
    const Matrix h = linalg::orthogonalize(random_matrix(n, n, rng));
    const Matrix p_raw_a = random_matrix(n, 1, rng);
    const Matrix p_raw_b = random_matrix(n, 1, rng);
    const Matrix q_raw_a = random_matrix(n, 2, rng);
    const Matrix q_raw_b = random_matrix(n, 2, rng);
    Signature2x2 first;
    for (int t = 0; t <= 40; ++t) {
        const double alpha = static_cast<double>(t) / 40.0;
        param::BcopFactors f;
        f.h = h;
        f.p = {linalg::projector_from_raw((1.0 - alpha) * p_raw_a + alpha * p_raw_b)};
        f.q = {linalg::projector_from_raw((1.0 - alpha) * q_raw_a + alpha * q_raw_b)};
        const Signature2x2 sig = component_signature_2x2(param::bcop_from_factors(f));
        if (t == 0) {
            first = sig;
        } else {
            CHECK(sig.det_sign == first.det_sign);
            CHECK(sig.p == first.p);
            CHECK(sig.q == first.q);
        }
    }
    CHECK(first.p == 1);
    CHECK(first.q == 2);
}

TEST_CASE("component_signature_2x2 rejects non-orthogonal kernels") {
    Rng rng(3);
    std::vector<Matrix> blocks;
    for (int i = 0; i < 4; ++i) blocks.push_back(random_matrix(2, 2, rng));
    const Kernel2D k = conv::make_kernel2d(2, 2, 2, 2, std::move(blocks));
    CHECK_THROWS_AS(component_signature_2x2(k), InvalidKernelError);
}
