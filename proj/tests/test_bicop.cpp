#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "egc/bicop.hpp"
#include "egc/kendall.hpp"
#include "egc/math.hpp"
#include "egc/rng.hpp"

using namespace egc;

namespace {

// Reference values below were produced with an independent arbitrary-precision
// implementation of each family's density and conditional cdf.

struct PointRef {
    double u, v, dens, h1;  // h1 = P(U <= u | V = v)
};

void check_points(const Bicop& c, const std::vector<PointRef>& refs, double rel = 1e-7) {
    for (const auto& r : refs) {
        INFO("u=" << r.u << " v=" << r.v);
        CHECK(c.density(r.u, r.v) == Catch::Approx(r.dens).epsilon(rel));
        CHECK(c.h1(r.u, r.v) == Catch::Approx(r.h1).epsilon(rel));
    }
}

// Closed-form copula cdfs used as independent oracles for the h-functions.
double clayton_cdf(double th, double u, double v) {
    return std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th);
}
double gumbel_cdf(double th, double u, double v) {
    const double x = -std::log(u), y = -std::log(v);
    return std::exp(-std::pow(std::pow(x, th) + std::pow(y, th), 1.0 / th));
}
double frank_cdf(double th, double u, double v) {
    const double a = std::expm1(-th * u) * std::expm1(-th * v) / std::expm1(-th);
    return -std::log1p(a) / th;
}

// Gaussian copula cdf by Simpson quadrature of phi(x) * Phi((y0 - rho x)/s).
double gaussian_cdf(double rho, double u, double v) {
    const double x0 = math::norm_quantile(u), y0 = math::norm_quantile(v);
    const double s = std::sqrt(1.0 - rho * rho);
    const double lo = -8.5;
    if (x0 <= lo) return 0.0;
    const int n = 3200;  // even
    const double h = (x0 - lo) / n;
    auto f = [&](double x) { return math::norm_pdf(x) * math::norm_cdf((y0 - rho * x) / s); };
    double acc = f(lo) + f(x0);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return acc * h / 3.0;
}

using Cdf = std::function<double(double, double)>;

Cdf rotate_cdf(Cdf base, int rotation) {
    switch (rotation) {
        case 0: return base;
        case 90:
            return [base](double u, double v) { return v - base(v, 1.0 - u); };
        case 180:
            return [base](double u, double v) {
                return u + v - 1.0 + base(1.0 - u, 1.0 - v);
            };
        default:  // 270
            return [base](double u, double v) { return u - base(1.0 - v, u); };
    }
}

// Central finite differences of the cdf against both h-functions on an
// interior grid.
void check_h_against_cdf(const Bicop& c, const Cdf& cdf, double tol = 1e-5) {
    const double eps = 1e-4;
    double worst1 = 0.0, worst2 = 0.0;
    for (int i = 1; i <= 20; ++i) {
        for (int j = 1; j <= 20; ++j) {
            const double u = i / 21.0, v = j / 21.0;
            const double dv = (cdf(u, v + eps) - cdf(u, v - eps)) / (2.0 * eps);
            const double du = (cdf(u + eps, v) - cdf(u - eps, v)) / (2.0 * eps);
            worst1 = std::max(worst1, std::fabs(c.h1(u, v) - dv));
            worst2 = std::max(worst2, std::fabs(c.h2(v, u) - du));
        }
    }
    INFO("max |h1 - dC/dv| = " << worst1 << ", max |h2 - dC/du| = " << worst2);
    CHECK(worst1 <= tol);
    CHECK(worst2 <= tol);
}

double midpoint_density_integral(const Bicop& c, int n = 400) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        for (int j = 0; j < n; ++j) acc += c.density(u, (j + 0.5) / n);
    }
    return acc / (double(n) * double(n));
}

double ks_uniform_distance(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d = std::max(d, std::fabs((i + 1) / n - x[i]));
        d = std::max(d, std::fabs(x[i] - i / n));
    }
    return d;
}

std::pair<std::vector<double>, std::vector<double>> draw(const Bicop& c, std::size_t n,
                                                         std::uint64_t seed) {
    RandomStream rng(seed);
    auto pairs = c.sample(n, rng);
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = pairs[i].first;
        v[i] = pairs[i].second;
    }
    return {std::move(u), std::move(v)};
}

} // namespace

TEST_CASE("density and conditional cdf match reference values", "[bicop]") {
    check_points(Bicop::clayton(2.0),
                 {{0.3, 0.7, 6.292894510012166e-01, 6.882371771256161e-02},
                  {0.5, 0.5, 1.481003649342278e+00, 4.319593977248312e-01},
                  {0.9, 0.2, 1.608103725058940e-01, 9.860892042061420e-01},
                  {0.05, 0.95, 8.741727172314209e-03, 1.457348027518343e-04}});
    check_points(Bicop::clayton(0.5),
                 {{0.3, 0.7, 9.343776634818590e-01, 2.068583414379633e-01},
                  {0.5, 0.5, 1.073669520154250e+00, 4.627133472847076e-01},
                  {0.9, 0.2, 7.140338466526025e-01, 9.308018321908973e-01},
                  {0.05, 0.95, 3.539393867735410e-01, 1.186651326872889e-02}});
    check_points(Bicop::gumbel(1.5),
                 {{0.3, 0.7, 8.535680030615111e-01, 1.956203608671763e-01},
                  {0.5, 0.5, 1.219573479897354e+00, 5.282400580427341e-01},
                  {0.9, 0.2, 3.610139342441206e-01, 9.768141778263454e-01},
                  {0.05, 0.95, 1.597376330437924e-01, 6.851074311242988e-03}});
    check_points(Bicop::gumbel(4.0),
                 {{0.3, 0.7, 1.277368682720913e-01, 1.105319489393300e-02},
                  {0.5, 0.5, 2.877375055742539e+00, 5.215194214468294e-01},
                  {0.9, 0.2, 8.927415357497203e-04, 9.999788361642411e-01},
                  {0.05, 0.95, 1.057519355806064e-05, 2.641916748303104e-07}});
    check_points(Bicop::frank(3.0),
                 {{0.3, 0.7, 7.695371398502756e-01, 1.692141802412852e-01},
                  {0.5, 0.5, 1.180825375183302e+00, 0.5},
                  {0.9, 0.2, 3.752231554738726e-01, 9.670944631167467e-01},
                  {0.05, 0.95, 2.115992402829348e-01, 9.838177493553840e-03}});
    check_points(Bicop::frank(-4.0),
                 {{0.3, 0.7, 1.463545860229599e+00, 4.266224735662548e-01},
                  {0.5, 0.5, 1.313035285499331e+00, 0.5},
                  {0.9, 0.2, 1.847342553442725e+00, 8.148637640419928e-01},
                  {0.05, 0.95, 2.923755696509777e+00, 1.564151224823363e-01}});
    check_points(Bicop::gaussian(0.5),
                 {{0.3, 0.7, 8.770819376466364e-01, 1.818629528753088e-01},
                  {0.5, 0.5, 1.154700538379252e+00, 0.5},
                  {0.9, 0.2, 3.802233549488907e-01, 9.753344333380913e-01},
                  {0.05, 0.95, 7.717324743155471e-02, 2.193050439056868e-03}});
    check_points(Bicop::gaussian(-0.3),
                 {{0.3, 0.7, 1.116965833092157e+00, 3.501910308919486e-01},
                  {0.5, 0.5, 1.048284836721918e+00, 0.5},
                  {0.9, 0.2, 1.331742259751437e+00, 8.596511722145324e-01},
                  {0.05, 0.95, 1.957193425809741e+00, 1.137175005667714e-01}});
    check_points(Bicop::student_t(0.5, 4.0),
                 {{0.3, 0.7, 8.317621445595840e-01, 1.689853098546239e-01},
                  {0.5, 0.5, 1.306853678036840e+00, 0.5},
                  {0.9, 0.2, 4.080534195750549e-01, 9.668361541174081e-01},
                  {0.05, 0.95, 3.410187826992220e-01, 1.845494669161047e-02}});
    check_points(Bicop::student_t(-0.2, 10.0),
                 {{0.3, 0.7, 1.107334408178339e+00, 3.282529435196156e-01},
                  {0.5, 0.5, 1.072860703066477e+00, 5.000000000000001e-01},
                  {0.9, 0.2, 1.226542682381940e+00, 8.785149607215821e-01},
                  {0.05, 0.95, 1.777205906468287e+00, 1.025997592970573e-01}});
}

TEST_CASE("independence copula is the identity in every operation", "[bicop]") {
    const Bicop c = Bicop::independence();
    for (double u : {0.05, 0.3, 0.8}) {
        for (double v : {0.1, 0.5, 0.99}) {
            CHECK(c.density(u, v) == 1.0);
            CHECK(c.h1(u, v) == u);
            CHECK(c.h2(v, u) == v);
            CHECK(c.h1_inverse(u, v) == u);
            CHECK(c.h2_inverse(v, u) == v);
        }
    }
    CHECK(c.n_parameters() == 0);
}

TEST_CASE("uncorrelated gaussian degenerates to independence", "[bicop]") {
    const Bicop c = Bicop::gaussian(0.0);
    CHECK(c.density(0.3, 0.8) == Catch::Approx(1.0).margin(1e-12));
    CHECK(c.h1(0.3, 0.8) == Catch::Approx(0.3).margin(1e-12));
    CHECK(Bicop::gaussian(0.5).density(0.5, 0.5) ==
          Catch::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("conditional cdf hits its limits in u", "[bicop]") {
    const std::vector<Bicop> fams = {
        Bicop::gaussian(0.6),   Bicop::student_t(0.4, 5.0), Bicop::clayton(2.0),
        Bicop::gumbel(2.0),     Bicop::frank(5.0),          Bicop::frank(-5.0),
        Bicop::clayton(2.0, 90)};
    for (const auto& c : fams) {
        for (double v : {0.08, 0.5, 0.93}) {
            CHECK(c.h1(1e-8, v) < 1e-2);
            CHECK(c.h1(1.0 - 1e-8, v) > 1.0 - 1e-2);
            CHECK(c.h1(0.5, v) > 0.0);
            CHECK(c.h1(0.5, v) < 1.0);
        }
    }
}

TEST_CASE("conditional cdf is nondecreasing in u", "[bicop]") {
    const std::vector<Bicop> fams = {Bicop::gaussian(-0.7), Bicop::student_t(0.8, 3.0),
                                     Bicop::clayton(4.0, 180), Bicop::gumbel(3.0),
                                     Bicop::frank(-8.0)};
    for (const auto& c : fams) {
        for (double v : {0.2, 0.5, 0.9}) {
            double prev = 0.0;
            for (int i = 1; i <= 50; ++i) {
                const double h = c.h1(i / 51.0, v);
                CHECK(h >= prev);
                prev = h;
            }
        }
    }
}

TEST_CASE("strong positive dependence pulls the conditional median down", "[bicop]") {
    // Conditioning on v = 0.01 under rho = 0.9, the median of U | V (the w=0.5
    // preimage of the conditional cdf) sits far below 0.5.
    const Bicop c = Bicop::gaussian(0.9);
    const double m = c.h1_inverse(0.5, 0.01);
    CHECK(m < 0.5);
    CHECK(m < 0.1);

    // Confirm by integrating the density over u at fixed v: the mass below m
    // is one half.
    const int n = 4000;  // Simpson panels (even count of intervals)
    const double lo = 1e-9, h = (m - lo) / n;
    auto f = [&](double u) { return c.density(u, 0.01); };
    double acc = f(lo) + f(m);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    const double mass_below = acc * h / 3.0;
    CHECK(mass_below == Catch::Approx(0.5).margin(1e-3));
}

TEST_CASE("h and h-inverse round trip within 1e-8", "[bicop]") {
    const std::vector<Bicop> fams = {
        Bicop::independence(),      Bicop::gaussian(0.5),    Bicop::gaussian(-0.3),
        Bicop::student_t(0.5, 4.0), Bicop::student_t(-0.2, 10.0),
        Bicop::clayton(2.0),        Bicop::clayton(2.0, 90), Bicop::clayton(0.5, 180),
        Bicop::clayton(2.0, 270),   Bicop::gumbel(1.5),      Bicop::gumbel(4.0, 180),
        Bicop::gumbel(1.5, 90),     Bicop::frank(3.0),       Bicop::frank(-4.0)};
    RandomStream rng(20240811);
    for (const auto& c : fams) {
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double w = rng.uniform(), v = rng.uniform();
            worst = std::max(worst, std::fabs(c.h1(c.h1_inverse(w, v), v) - w));
            worst = std::max(worst, std::fabs(c.h2(c.h2_inverse(w, v), v) - w));
        }
        INFO("family " << family_name(c.family()) << " rot " << c.rotation());
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("inverse recovers u away from the saturated tails", "[bicop]") {
    const std::vector<Bicop> fams = {Bicop::gaussian(0.5), Bicop::clayton(2.0),
                                     Bicop::gumbel(1.5), Bicop::frank(3.0)};
    for (const auto& c : fams) {
        for (int i = 1; i <= 9; ++i) {
            for (int j = 1; j <= 9; ++j) {
                const double u = i / 10.0, v = j / 10.0;
                CHECK(c.h1_inverse(c.h1(u, v), v) == Catch::Approx(u).margin(1e-6));
            }
        }
    }
}

TEST_CASE("gaussian h-inverse agrees with numeric inversion", "[bicop]") {
    const Bicop c = Bicop::gaussian(0.65);
    for (double w : {0.05, 0.4, 0.9}) {
        for (double v : {0.15, 0.5, 0.85}) {
            double lo = 1e-12, hi = 1.0 - 1e-12;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                (c.h1(mid, v) < w ? lo : hi) = mid;
            }
            CHECK(c.h1_inverse(w, v) == Catch::Approx(0.5 * (lo + hi)).margin(1e-9));
        }
    }
}

TEST_CASE("densities integrate to one", "[bicop]") {
    const std::vector<Bicop> settings = {
        Bicop::independence(),
        Bicop::gaussian(0.5),        Bicop::gaussian(-0.3),  Bicop::gaussian(0.8),
        Bicop::student_t(0.5, 4.0),  Bicop::student_t(-0.2, 10.0),
        Bicop::student_t(0.7, 3.0),
        Bicop::clayton(0.5),         Bicop::clayton(1.0),    Bicop::clayton(2.0),
        Bicop::gumbel(1.2),          Bicop::gumbel(1.5),     Bicop::gumbel(2.0),
        Bicop::frank(3.0),           Bicop::frank(-4.0),     Bicop::frank(10.0)};
    for (const auto& c : settings) {
        INFO("family " << family_name(c.family()));
        CHECK(midpoint_density_integral(c) == Catch::Approx(1.0).margin(1e-3));
    }
}

TEST_CASE("rotated densities are the base density at rotated arguments", "[bicop]") {
    for (const auto& [base, r90, r180, r270] :
         {std::array{Bicop::clayton(2.0), Bicop::clayton(2.0, 90),
                     Bicop::clayton(2.0, 180), Bicop::clayton(2.0, 270)},
          std::array{Bicop::gumbel(1.5), Bicop::gumbel(1.5, 90),
                     Bicop::gumbel(1.5, 180), Bicop::gumbel(1.5, 270)}}) {
        for (double u : {0.2, 0.45, 0.9}) {
            for (double v : {0.1, 0.55, 0.8}) {
                CHECK(r90.density(u, v) == base.density(v, 1.0 - u));
                CHECK(r180.density(u, v) == base.density(1.0 - u, 1.0 - v));
                CHECK(r270.density(u, v) == base.density(1.0 - v, u));
            }
        }
    }
}

TEST_CASE("h-functions match finite differences of the cdf", "[bicop]") {
    check_h_against_cdf(Bicop::clayton(2.0),
                        [](double u, double v) { return clayton_cdf(2.0, u, v); });
    for (int rot : {90, 180, 270}) {
        check_h_against_cdf(
            Bicop::clayton(2.0, rot),
            rotate_cdf([](double u, double v) { return clayton_cdf(2.0, u, v); }, rot));
    }
    check_h_against_cdf(Bicop::gumbel(1.5),
                        [](double u, double v) { return gumbel_cdf(1.5, u, v); });
    check_h_against_cdf(
        Bicop::gumbel(1.5, 180),
        rotate_cdf([](double u, double v) { return gumbel_cdf(1.5, u, v); }, 180));
    check_h_against_cdf(Bicop::frank(3.0),
                        [](double u, double v) { return frank_cdf(3.0, u, v); });
    check_h_against_cdf(Bicop::frank(-4.0),
                        [](double u, double v) { return frank_cdf(-4.0, u, v); });
    check_h_against_cdf(Bicop::gaussian(0.5),
                        [](double u, double v) { return gaussian_cdf(0.5, u, v); });
    check_h_against_cdf(Bicop::gaussian(-0.3),
                        [](double u, double v) { return gaussian_cdf(-0.3, u, v); });
}

TEST_CASE("sampling has uniform margins and the model's concordance", "[bicop]") {
    const std::size_t n = 10000;

    auto [iu, iv] = draw(Bicop::independence(), n, 71001);
    CHECK(std::fabs(kendall_tau(iu, iv)) < 0.03);
    CHECK(ks_uniform_distance(iu) < 0.02);
    CHECK(ks_uniform_distance(iv) < 0.02);

    auto [gu, gv] = draw(Bicop::gaussian(1.0 / std::sqrt(2.0)), n, 71002);
    CHECK(kendall_tau(gu, gv) == Catch::Approx(0.5).margin(0.03));
    CHECK(ks_uniform_distance(gu) < 0.02);
    CHECK(ks_uniform_distance(gv) < 0.02);

    auto [cu, cv] = draw(Bicop::clayton(2.0), n, 71003);
    CHECK(kendall_tau(cu, cv) == Catch::Approx(0.5).margin(0.03));
    CHECK(ks_uniform_distance(cv) < 0.02);

    auto [mu, mv] = draw(Bicop::gumbel(4.0), n, 71004);
    CHECK(kendall_tau(mu, mv) == Catch::Approx(0.75).margin(0.03));

    auto [ru, rv] = draw(Bicop::clayton(2.0, 90), n, 71005);
    CHECK(kendall_tau(ru, rv) == Catch::Approx(-0.5).margin(0.03));

    auto [fu, fv] = draw(Bicop::gaussian(0.5), n, 71006);
    CHECK(kendall_tau(fu, fv) == Catch::Approx(1.0 / 3.0).margin(0.03));
}

TEST_CASE("kendall tau inversion produces matching starting parameters", "[bicop]") {
    CHECK(kendall_tau_inversion({BicopFamily::gaussian, 0}, 0.3).parameters()[0] ==
          Catch::Approx(std::sin(math::pi * 0.15)).epsilon(1e-12));
    const Bicop st = kendall_tau_inversion({BicopFamily::student_t, 0}, -0.4);
    CHECK(st.parameters()[0] == Catch::Approx(std::sin(-math::pi * 0.2)).epsilon(1e-12));
    CHECK(st.parameters()[1] == 5.0);
    CHECK(kendall_tau_inversion({BicopFamily::clayton, 0}, 1.0 / 3.0).parameters()[0] ==
          Catch::Approx(1.0).epsilon(1e-12));
    CHECK(kendall_tau_inversion({BicopFamily::gumbel, 0}, 0.5).parameters()[0] ==
          Catch::Approx(2.0).epsilon(1e-12));

    const double th = kendall_tau_inversion({BicopFamily::frank, 0}, 0.3).parameters()[0];
    CHECK(frank_tau_from_theta(th) == Catch::Approx(0.3).margin(1e-6));
    const double thn = kendall_tau_inversion({BicopFamily::frank, 0}, -0.3).parameters()[0];
    CHECK(thn == Catch::Approx(-th).margin(1e-9));

    CHECK_THROWS_AS(kendall_tau_inversion({BicopFamily::gaussian, 0}, 1.0),
                    std::domain_error);
}

TEST_CASE("maximum likelihood recovers generating parameters", "[bicop]") {
    auto [gu, gv] = draw(Bicop::gaussian(0.6), 2000, 8101);
    const Bicop g = fit_mle({BicopFamily::gaussian, 0}, gu, gv);
    CHECK(g.parameters()[0] > 0.54);
    CHECK(g.parameters()[0] < 0.66);

    auto [cu, cv] = draw(Bicop::clayton(2.0), 2000, 8102);
    const Bicop c = fit_mle({BicopFamily::clayton, 0}, cu, cv);
    CHECK(c.parameters()[0] > 1.7);
    CHECK(c.parameters()[0] < 2.3);

    auto [ru, rv] = draw(Bicop::clayton(2.0, 180), 2000, 8103);
    const Bicop cr = fit_mle({BicopFamily::clayton, 180}, ru, rv);
    CHECK(cr.rotation() == 180);
    CHECK(cr.parameters()[0] > 1.7);
    CHECK(cr.parameters()[0] < 2.3);

    auto [mu, mv] = draw(Bicop::gumbel(1.8), 2000, 8104);
    const Bicop m = fit_mle({BicopFamily::gumbel, 0}, mu, mv);
    CHECK(m.parameters()[0] > 1.6);
    CHECK(m.parameters()[0] < 2.0);

    auto [fu, fv] = draw(Bicop::frank(4.0), 2000, 8105);
    const Bicop f = fit_mle({BicopFamily::frank, 0}, fu, fv);
    CHECK(f.parameters()[0] > 3.4);
    CHECK(f.parameters()[0] < 4.6);

    auto [nu_, nv_] = draw(Bicop::frank(-4.0), 2000, 8106);
    const Bicop fn = fit_mle({BicopFamily::frank, 0}, nu_, nv_);
    CHECK(fn.parameters()[0] > -4.6);
    CHECK(fn.parameters()[0] < -3.4);

    auto [tu, tv] = draw(Bicop::student_t(0.5, 4.0), 2000, 8107);
    const Bicop t = fit_mle({BicopFamily::student_t, 0}, tu, tv);
    CHECK(t.parameters()[0] > 0.44);
    CHECK(t.parameters()[0] < 0.56);
    CHECK(t.parameters()[1] >= 3.0);
    CHECK(t.parameters()[1] <= 7.0);
}

TEST_CASE("fits on independent data stay near independence", "[bicop]") {
    auto [u, v] = draw(Bicop::independence(), 2000, 8201);

    const Bicop g = fit_mle({BicopFamily::gaussian, 0}, u, v);
    CHECK(std::fabs(g.parameters()[0]) < 0.08);
    CHECK(std::fabs(g.loglik()) < 4.0);

    const Bicop c = fit_mle({BicopFamily::clayton, 0}, u, v);
    CHECK(c.parameters()[0] < 0.12);
    CHECK(std::fabs(c.loglik()) < 4.0);

    const Bicop m = fit_mle({BicopFamily::gumbel, 0}, u, v);
    CHECK(m.parameters()[0] < 1.06);
    CHECK(std::fabs(m.loglik()) < 4.0);

    const Bicop f = fit_mle({BicopFamily::frank, 0}, u, v);
    CHECK(std::fabs(f.parameters()[0]) < 0.8);
    CHECK(std::fabs(f.loglik()) < 4.0);
}

TEST_CASE("fitted log-likelihood is attained and beats the tau start", "[bicop]") {
    auto [u, v] = draw(Bicop::gaussian(0.5), 500, 8301);
    const double tau = kendall_tau(u, v);
    for (const CopulaSpec& spec : default_catalog()) {
        const Bicop b = fit_mle(spec, u, v);
        double sum = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) sum += b.log_density(u[i], v[i]);
        CHECK(b.loglik() == Catch::Approx(sum).margin(1e-6 * std::max(1.0, std::fabs(sum))));

        const Bicop init = kendall_tau_inversion(spec, tau);
        double ll0 = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) ll0 += init.log_density(u[i], v[i]);
        INFO("family " << family_name(spec.family) << " rot " << spec.rotation);
        CHECK(b.loglik() >= ll0 - 1e-6);
    }
}

TEST_CASE("family selection identifies strong gaussian dependence", "[bicop]") {
    int gaussian_wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto [u, v] = draw(Bicop::gaussian(0.8), 2000, 9000 + trial);
        if (select_family(u, v).family() == BicopFamily::gaussian) ++gaussian_wins;
    }
    INFO("gaussian selected in " << gaussian_wins << " / 100 trials");
    CHECK(gaussian_wins >= 90);
}

TEST_CASE("family selection prefers independence on independent data", "[bicop]") {
    // With seven alternatives in the catalog, AIC admits a spurious family
    // whenever some fit gains one likelihood point over flat, which happens on
    // roughly a quarter of independent samples; BIC's stiffer penalty almost
    // never does.
    int aic_wins = 0, bic_wins = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto [u, v] = draw(Bicop::independence(), 2000, 9200 + trial);
        if (select_family(u, v).family() == BicopFamily::independence) ++aic_wins;
        if (select_family(u, v, default_catalog(), SelectionCriterion::bic).family() ==
            BicopFamily::independence)
            ++bic_wins;
    }
    INFO("independence kept in " << aic_wins << " (aic) / " << bic_wins
                                 << " (bic) of 100 trials");
    CHECK(aic_wins >= 70);
    CHECK(bic_wins >= 95);
}

TEST_CASE("selection handles singleton catalogs and both criteria", "[bicop]") {
    auto [u, v] = draw(Bicop::clayton(2.0), 400, 9301);

    const Bicop only = select_family(u, v, {{BicopFamily::frank, 0}});
    CHECK(only.family() == BicopFamily::frank);

    const Bicop a = select_family(u, v, default_catalog(), SelectionCriterion::aic);
    const Bicop b = select_family(u, v, default_catalog(), SelectionCriterion::aic);
    CHECK(a.family() == b.family());
    CHECK(a.parameters() == b.parameters());

    const Bicop bic = select_family(u, v, default_catalog(), SelectionCriterion::bic);
    CHECK(bic.n_parameters() <= 2);

    CHECK_THROWS_AS(select_family(u, v, {}), std::invalid_argument);
}

TEST_CASE("invalid parameters and inputs are rejected", "[bicop]") {
    CHECK_THROWS_AS(Bicop::gaussian(1.0), std::domain_error);
    CHECK_THROWS_AS(Bicop::gaussian(-1.2), std::domain_error);
    CHECK_THROWS_AS(Bicop::student_t(0.5, 2.0), std::domain_error);
    CHECK_THROWS_AS(Bicop::clayton(0.0), std::domain_error);
    CHECK_THROWS_AS(Bicop::clayton(1.0, 45), std::domain_error);
    CHECK_THROWS_AS(Bicop::gumbel(0.9), std::domain_error);
    CHECK_THROWS_AS(Bicop::frank(0.0), std::domain_error);
    CHECK_THROWS_AS(Bicop::make({BicopFamily::frank, 90}, {3.0}), std::domain_error);
    CHECK_THROWS_AS(Bicop::make({BicopFamily::gaussian, 0}, {}), std::invalid_argument);
    CHECK_THROWS_AS(family_from_name("vine"), std::invalid_argument);

    const std::vector<double> tiny{0.1, 0.2, 0.3, 0.4, 0.5};
    CHECK_THROWS_AS(fit_mle({BicopFamily::gaussian, 0}, tiny, tiny),
                    std::invalid_argument);

    const Bicop via_make = Bicop::make({BicopFamily::clayton, 180}, {2.0});
    CHECK(via_make.density(0.3, 0.4) == Bicop::clayton(2.0, 180).density(0.3, 0.4));
    CHECK(family_from_name(family_name(BicopFamily::student_t)) ==
          BicopFamily::student_t);
}
