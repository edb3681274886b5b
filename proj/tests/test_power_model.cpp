#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace gridreduce;
using fixtures::lines_of;
using fixtures::to_std;
using std::numbers::pi;

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

NetworkParameters single_line(double gamma, double load) {
    NetworkParameters p;
    p.graph = UndirectedGraph(2, {{0, 1}});
    p.generators = {0};
    p.loads = {1};
    p.inertia = vec({1.0});
    p.damping = vec({1.0});
    p.reactance = vec({1.0 / gamma});
    p.load_power = vec({load});
    return p;
}

Vector random_eta(std::mt19937_64& rng, Eigen::Index m, double bound = 1.2) {
    std::uniform_real_distribution<double> d(-bound, bound);
    Vector v(m);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST(Network, ValidatesParameters) {
    auto p = fixtures::star(1.0, 1.0);
    p.inertia[0] = 0.0;
    EXPECT_THROW(PowerNetwork{p}, InvalidArgument);
    p = fixtures::star(1.0, 1.0);
    p.damping = vec({1.0});
    EXPECT_THROW(PowerNetwork{p}, InvalidArgument);
    p = fixtures::star(1.0, 1.0);
    p.reactance[1] = -1.0;
    EXPECT_THROW(PowerNetwork{p}, InvalidArgument);
    p = fixtures::star(1.0, 1.0);
    p.load_power = vec({NAN});
    EXPECT_THROW(PowerNetwork{p}, InvalidArgument);
    p = fixtures::star(1.0, 1.0);
    p.graph = UndirectedGraph(3, {{0, 2}});
    p.reactance = vec({1.0});
    EXPECT_THROW(PowerNetwork{p}, InvalidArgument);
}

TEST(LineWeights, DirectSubstitution) {
    auto p = single_line(4.0, 0.0);
    p.reactance = vec({0.25});
    EXPECT_DOUBLE_EQ(line_weights(p)[0], 4.0);
    p.reactance = vec({0.5});
    p.voltage = vec({1.02, 0.98});
    EXPECT_NEAR(line_weights(p)[0], 1.9992, 1e-15);
}

TEST(LineWeights, CaseStudyIsReciprocalReactance) {
    const auto s = builtin_case6();
    const auto w = line_weights(s.network);
    ASSERT_EQ(w.size(), 11u);
    for (Eigen::Index k = 0; k < 11; ++k) EXPECT_DOUBLE_EQ(w[static_cast<std::size_t>(k)], 1.0 / s.network.reactance[k]);
}

TEST(ActivePower, Examples) {
    const PowerNetwork two(single_line(2.0, 0.0));
    EXPECT_EQ(active_power(Vector::Zero(2), two), Vector::Zero(2));
    EXPECT_LT(max_abs(active_power(vec({pi / 6, 0.0}), two) - vec({1.0, -1.0})), 1e-15);
}

TEST(ActivePower, MatchesLineLoopAndBalances) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const PowerNetwork net(fixtures::random_network(rng, 10));
        const Vector theta = random_eta(rng, static_cast<Eigen::Index>(net.node_count()), 3.0);
        const Vector p = active_power(theta, net);
        const auto ref = oracle::line_flows(net.node_count(), lines_of(net.params().graph), to_std(net.weights().values()),
                                            to_std(theta));
        EXPECT_LT(oracle::max_diff(ref, p), 1e-12);
        EXPECT_LT(std::abs(p.sum()), 1e-12);
    }
}

TEST(LinearResidual, Examples) {
    const PowerNetwork zero(fixtures::star(1.0, 1.0));
    const auto r0 = linear_dae_residual(Vector::Zero(3), Vector::Zero(2), Vector::Zero(2), zero);
    EXPECT_EQ(max_abs(r0.generator), 0.0);
    EXPECT_EQ(max_abs(r0.load), 0.0);
    const PowerNetwork loaded(fixtures::star(1.0, 2.0, -0.7));
    EXPECT_DOUBLE_EQ(linear_dae_residual(Vector::Zero(3), Vector::Zero(2), Vector::Zero(2), loaded).load[0], -0.7);
}

TEST(LinearResidual, ZeroAtLinearEquilibrium) {
    // Linear power flow L theta = injections, solved by the oracle with the first angle pinned.
    const auto net = fixtures::case6();
    const Vector u = vec({0.3, 0.6, 0.9});
    const Vector inj = net.assemble_nodes(u, net.load_power());
    const auto l = oracle::laplacian(6, lines_of(net.params().graph), to_std(net.weights().values()));
    oracle::Dense a = oracle::zeros(5, 5);
    std::vector<double> b(5);
    for (std::size_t i = 1; i < 6; ++i) {
        b[i - 1] = inj[static_cast<Eigen::Index>(i)];
        for (std::size_t j = 1; j < 6; ++j) a[i - 1][j - 1] = l[i][j];
    }
    const auto x = oracle::solve(a, b);
    Vector theta(6);
    theta << 0.0, x[0], x[1], x[2], x[3], x[4];
    const auto r = linear_dae_residual(theta, Vector::Zero(3), u, net);
    EXPECT_LT(max_abs(r.generator), 1e-10);
    EXPECT_LT(max_abs(r.load), 1e-10);
}

TEST(SolveThetaL, Examples) {
    const PowerNetwork star(fixtures::star(1.0, 1.0));
    EXPECT_LT(max_abs(solve_theta_L(Vector::Zero(2), vec({0.0}), star)), 1e-15);
    EXPECT_LT(max_abs(solve_theta_L(vec({1.0, -1.0}), vec({0.0}), star)), 1e-15);
}

TEST(SolveThetaL, ZeroesLoadResidual) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 200; ++i) {
        const PowerNetwork net(fixtures::random_network(rng, 10, 2.0));
        const Vector tg = random_eta(rng, static_cast<Eigen::Index>(net.gen_count()));
        const Vector theta = net.assemble_nodes(tg, solve_theta_L(tg, net.load_power(), net));
        const auto r = linear_dae_residual(theta, Vector::Zero(tg.size()), Vector::Zero(tg.size()), net);
        EXPECT_LT(max_abs(r.load), 1e-10);
    }
}

TEST(PHat, Examples) {
    EXPECT_EQ(max_abs(p_hat(PowerNetwork(fixtures::star(1.0, 1.0, 0.0)))), 0.0);
    // The load draws 1 pu; each generator's share of the shifted supply is +0.5.
    EXPECT_LT(max_abs(p_hat(PowerNetwork(fixtures::star(1.0, 1.0, -1.0))) - vec({0.5, 0.5})), 1e-15);
}

TEST(PHat, PreservesTotals) {
    const auto net = fixtures::case6();
    EXPECT_LT(std::abs(p_hat(net).sum() + net.load_power().sum()), 1e-10);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const PowerNetwork r(fixtures::random_network(rng, 10, 2.0));
        EXPECT_LT(std::abs(p_hat(r).sum() + r.load_power().sum()), 1e-10);
    }
}

TEST(LinearReducedRhs, SynchronousFrequencyKeepsAngles) {
    const auto net = fixtures::case6();
    const auto r = linear_reduced_rhs(Vector::Zero(11), Vector::Constant(3, 0.4), Vector::Zero(3), net);
    EXPECT_LT(max_abs(r.d_eta), 1e-14);
}

TEST(LinearReducedRhs, ZeroAtLinearEquilibrium) {
    const auto net = fixtures::case6();
    const Vector u = p_hat(net);
    const Vector tg = vec({0.0, 0.0, 0.0});
    const Vector theta = net.assemble_nodes(tg, solve_theta_L(tg, net.load_power(), net));
    // With u = p_hat and theta_G = 0 the generator equation balances exactly.
    const Vector eta_s = project_eta_S(net.incidence().transpose() * theta, net);
    const auto r = linear_reduced_rhs(eta_s, Vector::Zero(3), u, net);
    EXPECT_LT(max_abs(r.d_eta), 1e-12);
    EXPECT_LT(max_abs(r.d_omega), 1e-10);
}

TEST(LinearReducedRhs, AngleRateMatchesFullNetwork) {
    // omega_L from the linear constraint: B_L Gamma B^T omega = 0.
    const auto net = fixtures::case6();
    const Vector wg = vec({0.3, -0.1, 0.7});
    const Vector wl = solve_theta_L(wg, Vector::Zero(3), net);
    const auto r = linear_reduced_rhs(Vector::Zero(11), wg, Vector::Zero(3), net);
    EXPECT_LT(max_abs(r.d_eta - net.incidence().transpose() * net.assemble_nodes(wg, wl)), 1e-10);
}

TEST(GammaPrime, Examples) {
    const PowerNetwork two(single_line(2.0, 0.0));
    EXPECT_EQ(gamma_prime(vec({0.0}), two), vec({2.0}));
    EXPECT_NEAR(gamma_prime(vec({pi / 3}), two)[0], 1.0, 1e-15);
    std::mt19937_64 rng(24);
    const auto net = fixtures::case6();
    for (int i = 0; i < 100; ++i) EXPECT_GT(gamma_prime(random_eta(rng, 11, 1.5), net).minCoeff(), 0.0);
}

TEST(ProjectedIncidenceAt, ZeroAnglesGiveConstantProjection) {
    const auto net = fixtures::case6();
    EXPECT_LT(max_abs(projected_incidence_at(Vector::Zero(11), net).matrix - net.constant_projection().matrix), 1e-15);
}

TEST(ProjectedIncidenceAt, StarAtEqualAngles) {
    const PowerNetwork star(fixtures::star(1.0, 1.0));
    const Vector eta = vec({pi / 6, pi / 6});
    const double c = std::cos(pi / 6);
    const auto ref = projected_incidence(star.params().graph, star.partition(), EdgeWeights({c, c}));
    EXPECT_LT(max_abs(projected_incidence_at(eta, star).matrix - ref.matrix), 1e-15);
}

TEST(ProjectedIncidenceAt, IdentitiesHoldWithStateWeights) {
    std::mt19937_64 rng(25);
    for (int i = 0; i < 200; ++i) {
        const PowerNetwork net(fixtures::random_network(rng, 10));
        const Vector eta = random_eta(rng, static_cast<Eigen::Index>(net.edge_count()));
        const auto ps = projected_incidence_at(eta, net);
        const Matrix g = gamma_prime(eta, net).asDiagonal();
        const auto lref = oracle::eliminate_nodes(
            oracle::laplacian(net.node_count(), lines_of(net.params().graph), to_std(gamma_prime(eta, net))),
            net.params().generators, net.params().loads);
        EXPECT_LT(max_abs(ps.matrix.transpose() * Vector::Ones(ps.matrix.rows())), 1e-10);
        EXPECT_LT(max_abs(ps.matrix * g * net.load_incidence().transpose()), 1e-10);
        EXPECT_LT(oracle::max_diff(lref, ps.matrix * g * ps.matrix.transpose()), 1e-10);
    }
}

TEST(ProjectedIncidenceAt, OutsideSecurityRegionIsRegularityLoss) {
    const auto net = fixtures::case6();
    Vector eta = Vector::Zero(11);
    eta[3] = pi / 2;
    EXPECT_THROW(projected_incidence_at(eta, net), RegularityLoss);
    eta[3] = NAN;
    EXPECT_THROW(projected_incidence_at(eta, net), RegularityLoss);
}

TEST(OmegaL, Examples) {
    const auto net = fixtures::case6();
    std::mt19937_64 rng(26);
    const Vector eta = random_eta(rng, 11);
    EXPECT_EQ(max_abs(omega_L_reconstruct(eta, Vector::Zero(3), net)), 0.0);
    EXPECT_LT(max_abs(omega_L_reconstruct(eta, Vector::Constant(3, -0.8), net) - Vector::Constant(3, -0.8)), 1e-12);
}

TEST(OmegaL, ZeroesDifferentiatedConstraint) {
    std::mt19937_64 rng(27);
    for (int i = 0; i < 200; ++i) {
        const PowerNetwork net(fixtures::random_network(rng, 10));
        const Vector eta = random_eta(rng, static_cast<Eigen::Index>(net.edge_count()));
        const Vector wg = random_eta(rng, static_cast<Eigen::Index>(net.gen_count()));
        const Vector w = net.assemble_nodes(wg, omega_L_reconstruct(eta, wg, net));
        const Vector r = net.load_incidence() * gamma_prime(eta, net).cwiseProduct(net.incidence().transpose() * w);
        EXPECT_LT(max_abs(r), 1e-10);
    }
}

TEST(NonlinearRhs, ConsistentWithFullNetwork) {
    std::mt19937_64 rng(28);
    for (int i = 0; i < 200; ++i) {
        const PowerNetwork net(fixtures::random_network(rng, 10));
        const Vector eta = random_eta(rng, static_cast<Eigen::Index>(net.edge_count()));
        const Vector wg = random_eta(rng, static_cast<Eigen::Index>(net.gen_count()));
        const auto r = nonlinear_reduced_rhs({eta, wg}, Vector::Zero(wg.size()), net);
        const Vector full = net.gen_incidence().transpose() * wg + net.load_incidence().transpose() * omega_L_reconstruct(eta, wg, net);
        EXPECT_LT(max_abs(r.d_eta - full), 1e-10);
        EXPECT_LT(oracle::distance_to_image(net.incidence().transpose(), r.d_eta), 1e-10);
    }
}

TEST(NonlinearRhs, SynchronousFrequencyKeepsAngles) {
    const auto net = fixtures::case6();
    std::mt19937_64 rng(29);
    const auto r = nonlinear_reduced_rhs({random_eta(rng, 11), Vector::Constant(3, 1.3)}, Vector::Zero(3), net);
    EXPECT_LT(max_abs(r.d_eta), 1e-13);
}

TEST(NonlinearRhs, VanishesAtEquilibrium) {
    const auto net = fixtures::case6();
    const Vector u = vec({0.3, 0.6, 0.9});
    const auto eq = find_equilibrium(u, net.load_power(), net);
    const auto r = nonlinear_reduced_rhs({eq.eta, Vector::Constant(3, eq.omega)}, u, net);
    EXPECT_LT(max_abs(r.d_eta), 1e-12);
    EXPECT_LT(max_abs(r.d_omega), 1e-11);
}

TEST(ConservedVector, Examples) {
    const auto net = fixtures::case6();
    EXPECT_EQ(max_abs(conserved_load_vector(Vector::Zero(11), net)), 0.0);
    const Vector eta0 = project_compatible(Vector::Zero(11), net);
    EXPECT_LT(max_abs(conserved_load_vector(eta0, net) - net.load_power()), 1e-10);
}

TEST(SynchronousFrequency, Examples) {
    auto p = builtin_case6().network;
    p.damping = Vector::Ones(3);
    const PowerNetwork net(p);
    const Vector eta = project_compatible(Vector::Zero(11), net);
    // 1^T u + 1^T p* = 2.1 - 1.8 = 0.3 over three unit dampings.
    EXPECT_NEAR(synchronous_frequency(eta, Vector::Constant(3, 0.7), net), 0.1, 1e-12);
    EXPECT_NEAR(synchronous_frequency(eta, Vector::Constant(3, 0.6), net), 0.0, 1e-12);
}

TEST(Equilibrium, ZeroInjection) {
    const auto net = PowerNetwork(fixtures::star(1.0, 2.0, 0.0));
    const auto eq = find_equilibrium(Vector::Zero(2), vec({0.0}), net);
    EXPECT_LT(max_abs(eq.eta), 1e-14);
    EXPECT_EQ(eq.omega, 0.0);
}

TEST(Equilibrium, SingleLineMatchesScalarInversion) {
    const PowerNetwork net(single_line(1.0, -0.5));
    const auto eq = find_equilibrium(vec({0.5}), vec({-0.5}), net);
    const double ref = oracle::newton_scalar([](double x) { return std::sin(x) - 0.5; }, [](double x) { return std::cos(x); }, 0.0);
    EXPECT_NEAR(eq.eta[0], ref, 1e-12);
    EXPECT_NEAR(eq.eta[0], 0.5236, 1e-4);
    EXPECT_NEAR(eq.omega, 0.0, 1e-15);
}

TEST(Equilibrium, CaseStudySatisfiesPowerFlow) {
    const auto net = fixtures::case6();
    const Vector u = vec({0.3, 0.6, 0.9});
    const auto eq = find_equilibrium(u, net.load_power(), net);
    const auto flows = oracle::line_flows(6, lines_of(net.params().graph), to_std(net.weights().values()), to_std(eq.theta));
    const Vector target = net.assemble_nodes(u - net.damping() * eq.omega, net.load_power());
    EXPECT_LT(oracle::max_diff(flows, target), 1e-10);
    EXPECT_GT(security_margin(eq.eta), 0.1);
    EXPECT_LT(max_abs(net.incidence().transpose() * eq.theta - eq.eta), 1e-15);
}

TEST(Equilibrium, UnbalancedInputGivesCommonFrequency) {
    const auto net = fixtures::case6();
    const Vector u = vec({0.5, 0.6, 0.9});
    const auto eq = find_equilibrium(u, net.load_power(), net);
    EXPECT_NEAR(eq.omega, 0.2 / net.damping().sum(), 1e-14);
    EXPECT_NEAR(synchronous_frequency(eq.eta, u, net), eq.omega, 1e-12);
}

TEST(Equilibrium, InfeasibleTransferFails) {
    const PowerNetwork net(single_line(1.0, -1.5));
    EXPECT_THROW(find_equilibrium(vec({1.5}), vec({-1.5}), net), Error);
}

TEST(StorageFunction, ZeroAtEquilibriumAndKineticOnly) {
    const auto net = fixtures::case6();
    const auto eq = find_equilibrium(vec({0.3, 0.6, 0.9}), net.load_power(), net);
    const ReducedState at{eq.eta, Vector::Constant(3, eq.omega)};
    EXPECT_NEAR(storage_W(at, eq, net), 0.0, 1e-14);
    const Vector d = vec({0.01, -0.02, 0.03});
    const ReducedState moved{eq.eta, at.omega + d};
    EXPECT_NEAR(storage_W(moved, eq, net), 0.5 * d.dot(net.inertia().cwiseProduct(d)), 1e-15);
}

TEST(StorageFunction, GradientMatchesFiniteDifferences) {
    const auto net = fixtures::case6();
    const auto eq = find_equilibrium(vec({0.3, 0.6, 0.9}), net.load_power(), net);
    std::mt19937_64 rng(30);
    for (int t = 0; t < 20; ++t) {
        const ReducedState x{random_eta(rng, 11), random_eta(rng, 3)};
        const auto g = storage_W_gradient(x, eq, net);
        for (Eigen::Index k = 0; k < 11; ++k) {
            const double fd = oracle::central_difference(
                [&](double v) {
                    ReducedState y = x;
                    y.eta[k] = v;
                    return storage_W(y, eq, net);
                },
                x.eta[k], 1e-3);
            EXPECT_NEAR(fd, g.eta[k], 1e-6 * std::max(1.0, std::abs(g.eta[k])));
        }
        for (Eigen::Index i = 0; i < 3; ++i) {
            const double fd = oracle::central_difference(
                [&](double v) {
                    ReducedState y = x;
                    y.omega[i] = v;
                    return storage_W(y, eq, net);
                },
                x.omega[i], 1e-3);
            EXPECT_NEAR(fd, g.omega[i], 1e-6 * std::max(1.0, std::abs(g.omega[i])));
        }
    }
}

TEST(StorageFunction, HessianAtEquilibriumIsPositiveDefinite) {
    const auto net = fixtures::case6();
    const auto eq = find_equilibrium(vec({0.3, 0.6, 0.9}), net.load_power(), net);
    const ReducedState at{eq.eta, Vector::Constant(3, eq.omega)};
    const Eigen::Index n = 14;
    auto w_at = [&](const Vector& z) { return storage_W({z.head(11), z.tail(3)}, eq, net); };
    Vector z0(n);
    z0 << at.eta, at.omega;
    const double h = 1e-4;
    Matrix hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            Vector pp = z0, pm = z0, mp = z0, mm = z0;
            pp[i] += h, pp[j] += h;
            pm[i] += h, pm[j] -= h;
            mp[i] -= h, mp[j] += h;
            mm[i] -= h, mm[j] -= h;
            hess(i, j) = (w_at(pp) - w_at(pm) - w_at(mp) + w_at(mm)) / (4 * h * h);
        }
    Matrix expected = Matrix::Zero(n, n);
    expected.topLeftCorner(11, 11) = gamma_prime(eq.eta, net).asDiagonal();
    expected.bottomRightCorner(3, 3) = net.inertia().asDiagonal();
    EXPECT_LT(max_abs(hess - expected), 1e-5);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(expected).eigenvalues().minCoeff(), 0.0);
}

TEST(Hamiltonian, Examples) {
    const auto net = fixtures::case6();
    EXPECT_NEAR(hamiltonian(Vector::Zero(11), Vector::Zero(3), net), -net.weights().values().sum(), 1e-12);
    const auto k = kron_model(net);
    const Vector w = vec({0.2, -0.1, 0.3});
    const double kin = 0.5 * w.dot(net.inertia().cwiseProduct(w));
    EXPECT_NEAR(hamiltonian(Vector::Zero(11), w, net) + net.weights().values().sum(), kin, 1e-14);
    EXPECT_NEAR(kron_hamiltonian(Vector::Zero(3), w, net.inertia(), k.graph.weights) + k.graph.weights.values().sum(), kin,
                1e-14);
}

TEST(Hamiltonian, NonincreasingAlongLinearTrajectory) {
    // Small states so that the cosine energy tracks the linear dynamics.
    const auto net = fixtures::case6();
    const Vector phat = p_hat(net);
    const Vector tg = vec({0.0, 0.002, -0.001});
    const Vector theta = net.assemble_nodes(tg, solve_theta_L(tg, Vector::Zero(3), net));
    const ReducedState x0{project_eta_S(net.incidence().transpose() * theta, net), vec({0.003, -0.002, 0.001})};
    IntegratorConfig cfg;
    cfg.horizon = 5.0;
    const auto traj = integrate_linear_reduced(x0, constant_input(phat), net, phat, cfg);
    double prev = hamiltonian(traj.states[0].eta, traj.states[0].omega, net);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double h = hamiltonian(traj.states[k].eta, traj.states[k].omega, net);
        EXPECT_LE(h - prev, 1e-12) << "sample " << k;
        prev = h;
    }
}

TEST(Disagreement, Examples) {
    const auto net = fixtures::case6();
    EXPECT_EQ(max_abs(frequency_disagreement(Vector::Constant(6, 2.5), net)), 0.0);
    const PowerNetwork two(single_line(1.0, 0.0));
    EXPECT_EQ(frequency_disagreement(vec({1.0, 0.0}), two), vec({1.0}));
    const auto k = kron_model(net);
    EXPECT_EQ(max_abs(kron_disagreement(Vector::Constant(3, -1.0), k.graph.incidence)), 0.0);
}

TEST(ProjectEtaS, DecompositionIdentity) {
    // For B_L Gamma eta = p*, eta = Pi^T eta + B_L^T (B_L Gamma B_L^T)^{-1} p*.
    const auto net = fixtures::case6();
    const Vector tg = vec({0.1, -0.05, 0.2});
    const Vector theta = net.assemble_nodes(tg, solve_theta_L(tg, net.load_power(), net));
    const Vector eta = net.incidence().transpose() * theta;
    const Matrix& bl = net.load_incidence();
    const Matrix s = bl * net.weights().as_diagonal() * bl.transpose();
    const auto y = oracle::solve(oracle::from_eigen(s), to_std(net.load_power()));
    const Vector rebuilt = project_eta_S(eta, net) + bl.transpose() * Eigen::Map<const Vector>(y.data(), 3);
    EXPECT_LT(max_abs(rebuilt - eta), 1e-10);
}

TEST(ProjectEtaS, IdempotentOnProjectedVectors) {
    const auto net = fixtures::case6();
    std::mt19937_64 rng(31);
    const Vector es = project_eta_S(random_eta(rng, 11), net);
    EXPECT_LT(max_abs(project_eta_S(es, net) - es), 1e-12);
}

TEST(SecurityMargin, Examples) {
    EXPECT_DOUBLE_EQ(security_margin(Vector::Zero(4)), pi / 2);
    EXPECT_DOUBLE_EQ(security_margin(vec({0.0, pi / 2})), 0.0);
    EXPECT_LT(security_margin(vec({-2.0})), 0.0);
    const auto net = fixtures::case6();
    EXPECT_GT(security_margin(find_equilibrium(vec({0.3, 0.6, 0.9}), net.load_power(), net).eta), 0.0);
}

TEST(KronModel, CaseStudyDimensions) {
    const auto k = kron_model(fixtures::case6());
    EXPECT_EQ(k.reduced_laplacian.rows(), 3);
    EXPECT_EQ(k.graph.graph.edge_count(), 3u);
}
