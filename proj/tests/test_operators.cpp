#include "tgf/estimators.hpp"
#include "tgf/operators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace tgf;

namespace {

PhysicalParams make_params(double mu, double a1, double a2, double beta)
{
    PhysicalParams p;
    p.mu = mu;
    p.alpha1 = a1;
    p.alpha2 = a2;
    p.beta = beta;
    return p;
}

SpectralState rnd(const ModeSet& b, u64 seed, double amp = 1.0)
{
    return random_state(b, 77, StreamTag::Survey, seed, 0, amp);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0;
    for (std::size_t j = 0; j < a.size(); ++j)
        m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

double max_abs(const std::vector<double>& a)
{
    double m = 0;
    for (double x : a)
        m = std::max(m, std::abs(x));
    return m;
}

// Gradient and Hessian of a mode function at a point, evaluated directly.
void mode_derivs(const DivFreeMode& m, double x, double y, double d[2][2], double h[2][2][2])
{
    double th = m.kx * x + m.ky * y, s = 1.0 / (M_PI * std::sqrt(2.0));
    bool c = m.parity == Parity::Cos;
    double f1 = c ? -std::sin(th) : std::cos(th);
    double f2 = c ? -std::cos(th) : -std::sin(th);
    double p[2] = {m.px, m.py}, k[2] = {double(m.kx), double(m.ky)};
    for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i) {
            d[l][i] = s * p[l] * k[i] * f1;
            for (int j = 0; j < 2; ++j)
                h[l][i][j] = s * p[l] * k[i] * k[j] * f2;
        }
}

} // namespace

TEST(Drift, ZeroStateZeroForce)
{
    auto p = make_params(1, 0.5, -0.2, 1);
    auto b = build_basis(3, p);
    auto d = assemble_drift(SpectralState(b.size()), 0.0, p, ForceModel{}, b, 14);
    for (const auto* v : {&d.laplacian, &d.convection, &d.alpha1_shear, &d.alpha1_transport, &d.alpha2_term,
                          &d.beta_term, &d.force})
        for (double x : *v)
            EXPECT_EQ(x, 0.0);
}

TEST(Drift, ShearFlowByHand)
{
    auto p = make_params(0.7, 0.5, -0.2, 1.3);
    auto b = build_basis(1, p);
    SpectralState s(b.size());
    std::size_t j = b.index_of(0, 1, Parity::Sin);
    s[j] = M_PI * std::sqrt(2.0); // u = (sin y, 0)
    auto d = assemble_drift(s, 0.0, p, ForceModel{}, b, 6);
    for (std::size_t q = 0; q < b.size(); ++q) {
        EXPECT_NEAR(d.convection[q], 0.0, 1e-12);
        EXPECT_NEAR(d.laplacian[q], -p.mu * s[q], 1e-14);
        EXPECT_NEAR(d.alpha1_shear[q], 0.0, 1e-12);
        EXPECT_NEAR(d.alpha1_transport[q], 0.0, 1e-12);
        EXPECT_NEAR(d.alpha2_term[q], 0.0, 1e-12);
    }
    // div(|A|^2 A) = (-1.5 sin y - 1.5 sin 3y, 0); only sin y survives at n_max = 1.
    EXPECT_NEAR(d.beta_term[j], -p.beta * 3.0 * M_PI / std::sqrt(2.0), 1e-12);
    for (std::size_t q = 0; q < b.size(); ++q)
        if (q != j) {
            EXPECT_NEAR(d.beta_term[q], 0.0, 1e-12);
        }
}

TEST(Drift, ConvectionMatchesStrongFormProjection)
{
    auto p = make_params(1, 0.3, 0.1, 1);
    auto b = build_basis(5, p);
    Transform tr(b, 22);
    auto s = rnd(b, 3);
    Workspace ws;
    auto d = assemble_drift(s, 0.0, p, ForceModel{}, tr, ws);
    auto g = to_grid(s, tr);
    std::vector<double> f1(tr.points()), f2(tr.points());
    for (std::size_t q = 0; q < tr.points(); ++q) {
        f1[q] = -(g.u1[q] * g.g11[q] + g.u2[q] * g.g12[q]);
        f2[q] = -(g.u1[q] * g.g21[q] + g.u2[q] * g.g22[q]);
    }
    auto strong = project(f1, f2, tr);
    EXPECT_LT(max_abs_diff(strong, d.convection), 1e-11 * (1 + max_abs(strong)));
}

TEST(Drift, WeakPairingsMatchDirectQuadrature)
{
    auto p = make_params(1.2, 0.4, -0.3, 0.9);
    auto b = build_basis(3, p);
    const int M = 14;
    Transform tr(b, M);
    auto s = rnd(b, 5);
    Workspace ws;
    auto d = assemble_drift(s, 0.0, p, ForceModel{}, tr, ws);
    auto g = to_grid(s, tr);
    double h2 = tr.cell();
    for (std::size_t j : {std::size_t(0), std::size_t(5), std::size_t(17), b.size() - 1}) {
        double shear = 0, square = 0, cubic = 0, transport = 0;
        for (int i = 0; i < M; ++i)
            for (int k = 0; k < M; ++k) {
                std::size_t q = std::size_t(i) * M + k;
                double x = 2 * M_PI * i / M, y = 2 * M_PI * k / M;
                double dv[2][2], hv[2][2][2];
                mode_derivs(b[j], x, y, dv, hv);
                double G[2][2] = {{g.g11[q], g.g12[q]}, {g.g21[q], g.g22[q]}};
                double A[2][2], S[2][2], Q[2][2];
                for (int l = 0; l < 2; ++l)
                    for (int m = 0; m < 2; ++m)
                        A[l][m] = G[l][m] + G[m][l];
                double a2 = 0;
                for (int l = 0; l < 2; ++l)
                    for (int m = 0; m < 2; ++m) {
                        S[l][m] = 0;
                        Q[l][m] = 0;
                        for (int r = 0; r < 2; ++r) {
                            S[l][m] += G[r][l] * A[r][m] + A[l][r] * G[r][m];
                            Q[l][m] += A[l][r] * A[r][m];
                        }
                        a2 += A[l][m] * A[l][m];
                    }
                double u[2] = {g.u1[q], g.u2[q]};
                for (int l = 0; l < 2; ++l)
                    for (int m = 0; m < 2; ++m) {
                        shear -= S[l][m] * dv[l][m];
                        square -= Q[l][m] * dv[l][m];
                        cubic -= a2 * A[l][m] * dv[l][m];
                        for (int i2 = 0; i2 < 2; ++i2)
                            transport += u[i2] * A[l][m] * hv[l][i2][m];
                    }
            }
        EXPECT_NEAR(d.alpha1_shear[j], p.alpha1 * shear * h2, 1e-11);
        EXPECT_NEAR(d.alpha2_term[j], p.alpha2 * square * h2, 1e-11);
        EXPECT_NEAR(d.beta_term[j], p.beta * cubic * h2, 1e-10);
        EXPECT_NEAR(d.alpha1_transport[j], p.alpha1 * transport * h2, 1e-11);
    }
}

TEST(Drift, FusedPathEqualsBreakdown)
{
    auto p = make_params(0.8, 0.6, -0.4, 1.1);
    auto b = build_basis(6, p);
    Transform tr(b, 26);
    auto s = rnd(b, 9, 0.7);
    Workspace ws;
    auto d = assemble_drift(s, 0.0, p, ForceModel{}, tr, ws);
    std::vector<double> fused(b.size(), 0.0);
    double a4 = add_nonlinear_drift(s.coeffs, p, 1.0, tr, ws, fused);
    std::vector<double> sum(b.size());
    for (std::size_t j = 0; j < b.size(); ++j)
        sum[j] = d.convection[j] + d.alpha1_shear[j] + d.alpha1_transport[j] + d.alpha2_term[j] + d.beta_term[j];
    EXPECT_LT(max_abs_diff(sum, fused), 1e-12 * (1 + max_abs(sum)));
    EXPECT_NEAR(a4, a_l4_pow4(to_grid(s, tr)), 1e-12 * a4);
    EXPECT_NEAR(a4_only(s.coeffs, tr, ws), a4, 1e-12 * a4);
}

TEST(Drift, ForceKinds)
{
    auto p = make_params(1, 0, 0, 1);
    auto b = build_basis(2, p);
    ForceModel f;
    f.kind = ForceKind::Decaying;
    f.eta1 = 2.0;
    f.profile.assign(b.size(), 0.0);
    f.profile[3] = 1.5;
    auto d = assemble_drift(SpectralState(b.size()), 1.0, p, f, b, 8);
    EXPECT_NEAR(d.force[3], 1.5 * std::exp(-1.0), 1e-15);
    auto tot = d.total();
    EXPECT_NEAR(tot[3], d.force[3], 0.0);
    f.kind = ForceKind::Constant;
    EXPECT_EQ(f.coeffs(5.0, b.size())[3], 1.5);
}

TEST(Drift, NonFiniteStateThrowsDiverged)
{
    auto p = make_params(1, 0.5, 0, 1);
    auto b = build_basis(2, p);
    SpectralState s(b.size());
    s[0] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(assemble_drift(s, 0.0, p, ForceModel{}, b, 8), DivergedError);
}

TEST(Drift, DealiasedResolutionIsResolutionIndependent)
{
    auto p = make_params(1, 0.5, -0.2, 1);
    const int n = 4;
    auto b = build_basis(n, p);
    auto s = rnd(b, 12);
    auto total = [&](int M) {
        auto d = assemble_drift(s, 0.0, p, ForceModel{}, b, M);
        return d.total();
    };
    auto ref = total(2 * (4 * n + 2));
    auto dflt = total(4 * n + 2);
    EXPECT_LT(max_abs_diff(ref, dflt), 1e-10 * (1 + max_abs(ref)));
    // At M = 4 n_max only the outer shell |k|_inf = n_max feels aliasing.
    auto edge = total(4 * n);
    for (std::size_t j = 0; j < b.size(); ++j)
        if (std::max(std::abs(b[j].kx), std::abs(b[j].ky)) < n) {
            EXPECT_NEAR(edge[j], ref[j], 1e-10 * (1 + max_abs(ref)));
        }
}

TEST(Identities, VanishOnRandomStates)
{
    auto p = make_params(1, 0.5, 0.3, 1);
    auto b = build_basis(8, p);
    Transform tr(b, 32);
    for (u64 r = 0; r < 20; ++r) {
        auto s = rnd(b, 100 + r, std::pow(10.0, -1.0 + 0.15 * r));
        auto id = energy_pairing_identities(s, tr);
        EXPECT_LT(id.max_relative(), 1e-8) << r;
        double v = norm_v(s, b);
        EXPECT_LT(std::abs(id.convection.value), 1e-8 * (1 + v * v * v));
        EXPECT_LT(std::abs(id.transport.value), 1e-8 * (1 + v * v * v));
        EXPECT_GT(id.cubic.scale, 0.0);
    }
}

TEST(Identities, ZeroAndShear)
{
    auto p = make_params(1, 0.5, 0.3, 2);
    auto b = build_basis(2, p);
    auto z = energy_pairing_identities(SpectralState(b.size()), p, b, 10);
    EXPECT_EQ(z.convection.value, 0.0);
    EXPECT_EQ(z.transport.value, 0.0);
    EXPECT_EQ(z.cubic.value, 0.0);
    EXPECT_EQ(z.square.value, 0.0);

    SpectralState s(b.size());
    s[b.index_of(0, 1, Parity::Sin)] = M_PI * std::sqrt(2.0);
    auto id = energy_pairing_identities(s, p, b, 10);
    // (div |A|^2 A, u) = -(1/2) 6 pi^2, cancelled by (1/2) ||A||_4^4
    EXPECT_NEAR(id.cubic.scale, 3 * M_PI * M_PI, 1e-11);
    EXPECT_NEAR(id.cubic.value, 0.0, 1e-11);
    EXPECT_NEAR(id.convection.value, 0.0, 1e-13);
}

TEST(Trilinear, AntisymmetryAndShear)
{
    auto p = make_params(1, 0.5, 0.3, 1);
    auto b = build_basis(12, p);
    Transform tr(b, 48);
    for (u64 r = 0; r < 5; ++r) {
        auto u = rnd(b, 300 + r), y = rnd(b, 400 + r), z = rnd(b, 500 + r);
        double byz = trilinear_b(u, y, z, tr), bzy = trilinear_b(u, z, y, tr);
        double scale = std::abs(byz) + std::abs(bzy) + 1e-300;
        EXPECT_LT(std::abs(byz + bzy), 1e-10 * std::max(1.0, scale));
        EXPECT_LT(std::abs(trilinear_b(u, y, y, tr)), 1e-10 * (1 + norm_v_sq(y, b) * norm_v(u, b)));
        EXPECT_GT(std::abs(byz), 1e-3); // nontrivial
    }
    auto b1 = build_basis(1, p);
    SpectralState s(b1.size());
    s[b1.index_of(0, 1, Parity::Sin)] = 1.0;
    EXPECT_NEAR(trilinear_b(s, s, s, b1, 4), 0.0, 1e-15);
    EXPECT_THROW(trilinear_b(s, rnd(b, 1), s, b1, 4), ConfigError);
}

TEST(QOperator, LinearStokesCase)
{
    auto p = make_params(0.7, 0, 0, 0);
    auto b = build_basis(4, p);
    auto s = rnd(b, 21);
    auto q = q_operator(s, p, b, 18);
    for (std::size_t j = 0; j < b.size(); ++j)
        EXPECT_NEAR(q[j], 0.7 * b[j].k2() * s[j], 1e-12 * (1 + std::abs(q[j])));
}

TEST(QOperator, ConsistentWithDriftAndNotHomogeneous)
{
    auto p = make_params(1, 0.4, -0.1, 1.5);
    auto b = build_basis(4, p);
    Transform tr(b, 18);
    Workspace ws;
    auto s = rnd(b, 23);
    auto q = q_operator(s, p, tr, ws);
    auto d = assemble_drift(s, 0.0, p, ForceModel{}, tr, ws);
    for (std::size_t j = 0; j < b.size(); ++j) {
        double rest = d.laplacian[j] + d.alpha1_shear[j] + d.alpha2_term[j] + d.beta_term[j];
        EXPECT_NEAR(q[j] + rest, 0.0, 1e-11 * (1 + std::abs(q[j])));
    }
    auto s2 = s;
    for (double& c : s2.coeffs)
        c *= 2;
    auto q2 = q_operator(s2, p, tr, ws);
    EXPECT_GT(max_abs_diff(q2, std::vector<double>(q.size())), 0.0);
    double dev = 0;
    for (std::size_t j = 0; j < q.size(); ++j)
        dev = std::max(dev, std::abs(q2[j] - 2 * q[j]));
    EXPECT_GT(dev, 1e-3 * max_abs(q));
}

TEST(Monotonicity, GapBasics)
{
    auto p = make_params(1, 0.5, -0.5, 1);
    auto b = build_basis(4, p);
    Transform tr(b, 18);
    auto u = rnd(b, 31);
    EXPECT_EQ(monotonicity_gap_detail(u, u, p, tr).gap, 0.0);

    // Tiny states: the viscous part dominates.
    auto us = rnd(b, 32, 1e-6), ys = rnd(b, 33, 1e-6);
    SpectralState w(b.size());
    for (std::size_t j = 0; j < b.size(); ++j)
        w[j] = us[j] - ys[j];
    double gap = monotonicity_gap(us, ys, p, b, 18);
    EXPECT_NEAR(gap / (p.mu * grad_l2_sq(w, b)), 1.0, 1e-4);
}

TEST(Monotonicity, SpectralAndGridPairingsAgree)
{
    auto p = make_params(1, 0.8, -0.3, 1.2);
    auto b = build_basis(5, p);
    Transform tr(b, 22);
    for (u64 r = 0; r < 5; ++r) {
        auto g = monotonicity_gap_detail(rnd(b, 40 + r, 2.0), rnd(b, 50 + r, 0.5), p, tr);
        EXPECT_NEAR(g.gap, g.grid, 1e-11 * g.scale);
    }
}

TEST(Monotonicity, RandomPairsInsideRegion)
{
    // 3 a1^2 + 4 (a1 + a2)^2 = 24 mu beta on the boundary row.
    std::vector<PhysicalParams> grid = {make_params(1, 0, 0, 1), make_params(1, 1, -1, 0.125),
                                        make_params(0.5, 2, 1, 5.0)};
    grid.push_back(make_params(1, 2, -0.5, (3 * 4.0 + 4 * 1.5 * 1.5) / 24.0));
    auto b = build_basis(4, grid[0]);
    auto rows = monotonicity_survey(grid, 200, b, 18, 2024);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.inside_region);
        EXPECT_TRUE(r.ok) << "min relative gap " << r.min_relative;
        EXPECT_EQ(r.samples, 200u);
    }
}
