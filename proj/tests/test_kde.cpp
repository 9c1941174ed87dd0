#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aml/error.hpp"
#include "aml/kde.hpp"
#include "aml/rng.hpp"

using namespace aml;

namespace {

// Direct evaluation of the density formula, no log-space tricks and no fallback.
double density_oracle(const Vector& target, const std::vector<Vector>& samples,
                      const Vector& hdiag) {
    double det = 1.0;
    for (double h : hdiag) det *= h;
    double sum = 0.0;
    for (const auto& s : samples) {
        double q = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            q += (target[i] - s[i]) * (target[i] - s[i]) / hdiag[i];
        }
        sum += q < 1.0 ? std::exp(-q / 2.0) : std::exp(-std::sqrt(q) / 2.0);
    }
    return sum / (static_cast<double>(samples.size()) * std::sqrt(det));
}

std::vector<Vector> random_samples(Stream& rng, std::size_t n, std::size_t d, double scale) {
    std::normal_distribution<double> z(0.0, scale);
    std::vector<Vector> out(n, Vector(d));
    for (auto& s : out) {
        for (double& v : s) v = z(rng);
    }
    return out;
}

}  // namespace

TEST_CASE("modified gaussian kernel values") {
    CHECK(modified_gaussian_kernel(0.0) == doctest::Approx(1.0));
    CHECK(modified_gaussian_kernel(1.0) == doctest::Approx(std::exp(-0.5)));
    CHECK(modified_gaussian_kernel(4.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(modified_gaussian_kernel(0.5) == doctest::Approx(std::exp(-0.25)));
    CHECK_THROWS_AS(modified_gaussian_kernel(-1e-12), DomainError);
}

TEST_CASE("kernel is strictly decreasing, continuous at q = 1, heavier-tailed than gaussian") {
    double prev = modified_gaussian_kernel(0.0);
    for (int i = 1; i <= 4000; ++i) {
        const double q = 0.005 * i;
        const double k = modified_gaussian_kernel(q);
        CHECK(k < prev);
        prev = k;
        if (q > 1.0) CHECK(k > std::exp(-q / 2.0));
    }
    for (double eps : {1e-3, 1e-6, 1e-9, 1e-12}) {
        CHECK(std::abs(modified_gaussian_kernel(1.0 - eps) - modified_gaussian_kernel(1.0 + eps)) <
              eps);
    }
}

TEST_CASE("silverman bandwidth") {
    SUBCASE("d = 1, sd = 1, n = 100 matches the normal-reference rule") {
        Stream rng(3);
        auto samples = random_samples(rng, 100, 1, 1.0);
        // standardize to sample sd exactly 1
        double m = 0.0;
        for (auto& s : samples) m += s[0];
        m /= 100.0;
        double ss = 0.0;
        for (auto& s : samples) ss += (s[0] - m) * (s[0] - m);
        const double sd = std::sqrt(ss / 99.0);
        for (auto& s : samples) s[0] = (s[0] - m) / sd;

        const double h = std::pow(4.0 / 3.0, 0.2) * std::pow(100.0, -0.2);  // 0.42168
        const BandwidthMatrix H = silverman_bandwidth(samples);
        CHECK(H.diag()[0] == doctest::Approx(h * h).epsilon(1e-12));
        CHECK(H.diag()[0] == doctest::Approx(0.177815).epsilon(1e-5));
        // textbook 1.06 sigma n^(-1/5)
        const double textbook = 1.06 * std::pow(100.0, -0.2);
        CHECK(std::abs(std::sqrt(H.diag()[0]) - textbook) / textbook < 0.3);
    }
    SUBCASE("identical samples get a positive floor") {
        for (std::size_t d : {1u, 3u, 10u}) {
            std::vector<Vector> samples(5, Vector(d, 2.5));
            const BandwidthMatrix H = silverman_bandwidth(samples);
            for (double h : H.diag()) CHECK(h > 0.0);
        }
        std::vector<Vector> zeros(4, Vector(2, 0.0));
        CHECK(silverman_bandwidth(zeros).diag()[0] > 0.0);
    }
    SUBCASE("scaling coordinate i by s scales diag[i] by s^2") {
        Stream rng(5);
        auto samples = random_samples(rng, 50, 3, 2.0);
        const BandwidthMatrix H = silverman_bandwidth(samples);
        for (auto& s : samples) s[1] *= 7.0;
        const BandwidthMatrix H2 = silverman_bandwidth(samples);
        CHECK(H2.diag()[0] == doctest::Approx(H.diag()[0]));
        CHECK(H2.diag()[1] == doctest::Approx(49.0 * H.diag()[1]));
        CHECK(H2.diag()[2] == doctest::Approx(H.diag()[2]));
    }
    SUBCASE("permutation invariant") {
        Stream rng(8);
        auto samples = random_samples(rng, 30, 4, 1.0);
        const BandwidthMatrix H = silverman_bandwidth(samples);
        std::mt19937 shuffle_rng(1);
        for (int rep = 0; rep < 5; ++rep) {
            std::shuffle(samples.begin(), samples.end(), shuffle_rng);
            const BandwidthMatrix Hp = silverman_bandwidth(samples);
            for (std::size_t i = 0; i < 4; ++i) {
                CHECK(Hp.diag()[i] == doctest::Approx(H.diag()[i]).epsilon(1e-13));
            }
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(silverman_bandwidth(std::vector<Vector>{Vector{1.0}}),
                        InsufficientDataError);
        CHECK_THROWS_AS(silverman_bandwidth(std::vector<Vector>{}), InsufficientDataError);
    }
}

TEST_CASE("smooth bandwidth moving average") {
    const std::vector<BandwidthMatrix> one{BandwidthMatrix({2.0})};
    CHECK(smooth_bandwidth(one, 5).diag()[0] == doctest::Approx(2.0));
    const std::vector<BandwidthMatrix> two{BandwidthMatrix({1.0}), BandwidthMatrix({3.0})};
    CHECK(smooth_bandwidth(two, 2).diag()[0] == doctest::Approx(2.0));
    const std::vector<BandwidthMatrix> three{BandwidthMatrix({1.0}), BandwidthMatrix({3.0}),
                                             BandwidthMatrix({5.0})};
    CHECK(smooth_bandwidth(three, 2).diag()[0] == doctest::Approx(4.0));
    CHECK_THROWS_AS(smooth_bandwidth(std::vector<BandwidthMatrix>{}, 3), InsufficientDataError);

    BandwidthHistory hist(2);
    hist.push(BandwidthMatrix({1.0, 10.0}));
    hist.push(BandwidthMatrix({3.0, 20.0}));
    hist.push(BandwidthMatrix({5.0, 30.0}));
    CHECK(hist.size() == 2);
    CHECK(hist.smoothed().diag()[0] == doctest::Approx(4.0));
    CHECK(hist.smoothed().diag()[1] == doctest::Approx(25.0));
}

TEST_CASE("kde log likelihood examples") {
    const KdeConfig cfg;
    SUBCASE("single sample at the target") {
        const auto est = kde_log_likelihood(Vector{0.3, -1.0}, std::vector<Vector>{{0.3, -1.0}},
                                            BandwidthMatrix::identity(2), cfg);
        CHECK(est.log_value == doctest::Approx(0.0));
        CHECK_FALSE(est.degenerate);
        CHECK(est.n_points == 1);
    }
    SUBCASE("duplicated target samples") {
        const auto est = kde_log_likelihood(Vector{1.0}, std::vector<Vector>{{1.0}, {1.0}},
                                            BandwidthMatrix::identity(1), cfg);
        CHECK(est.log_value == doctest::Approx(0.0));
    }
    SUBCASE("outer branch") {
        const auto est = kde_log_likelihood(Vector{0.0}, std::vector<Vector>{{2.0}},
                                            BandwidthMatrix({1.0}), cfg);
        CHECK(std::exp(est.log_value) == doctest::Approx(std::exp(-1.0)));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(kde_log_likelihood(Vector{0.0}, std::vector<Vector>{{2.0, 1.0}},
                                           BandwidthMatrix({1.0}), cfg),
                        DimensionError);
        CHECK_THROWS_AS(kde_log_likelihood(Vector{0.0, 1.0}, std::vector<Vector>{{2.0, 1.0}},
                                           BandwidthMatrix({1.0}), cfg),
                        DimensionError);
    }
}

TEST_CASE("nearest neighbor fallback") {
    SUBCASE("exact match wins") {
        const BandwidthMatrix H({4.0, 9.0});
        const auto est = nearest_neighbor_fallback(
            Vector{1.0, 2.0}, std::vector<Vector>{{1.0, 2.0}, {100.0, -50.0}}, H);
        CHECK(est.degenerate);
        CHECK(est.n_points == 1);
        CHECK(std::exp(est.log_value) == doctest::Approx(1.0 / 6.0));
    }
    SUBCASE("argmin by raw distance") {
        const auto est = nearest_neighbor_fallback(
            Vector{0.0}, std::vector<Vector>{{5.0}, {3.0}, {-4.0}}, BandwidthMatrix({1.0}));
        CHECK(est.log_value == doctest::Approx(-1.5));
    }
    SUBCASE("ties go to the lowest index") {
        // equal raw distance, different whitened distance: sample 0 must be used
        const BandwidthMatrix H({1.0, 100.0});
        const auto est = nearest_neighbor_fallback(
            Vector{0.0, 0.0}, std::vector<Vector>{{3.0, 0.0}, {0.0, 3.0}}, H);
        CHECK(est.log_value == doctest::Approx(-0.5 * 3.0 - 0.5 * std::log(100.0)));
    }
}

TEST_CASE("fallback triggers exactly below the zero threshold and stays finite") {
    const Vector target{0.0, 0.0};
    const std::vector<Vector> samples{{3.0, 4.0}, {6.0, 8.0}};
    const Vector h{0.25, 0.25};
    const double raw = density_oracle(target, samples, h);
    KdeConfig cfg;
    cfg.zero_threshold = raw * (1.0 + 1e-9);
    const auto below = kde_log_likelihood(target, samples, BandwidthMatrix(h), cfg);
    CHECK(below.degenerate);
    // nearest is (3, 4): q = 25 / 0.25 = 100
    CHECK(below.log_value == doctest::Approx(-5.0 - 0.5 * std::log(0.0625)));
    cfg.zero_threshold = raw * (1.0 - 1e-9);
    const auto above = kde_log_likelihood(target, samples, BandwidthMatrix(h), cfg);
    CHECK_FALSE(above.degenerate);
    CHECK(above.log_value == doctest::Approx(std::log(raw)).epsilon(1e-12));

    // far beyond double range: the fallback still returns a finite value
    const auto far = kde_log_likelihood(Vector{0.0}, std::vector<Vector>{{1e6}, {2e6}},
                                        BandwidthMatrix({1e-6}), KdeConfig{});
    CHECK(far.degenerate);
    CHECK(std::isfinite(far.log_value));
}

TEST_CASE("kde invariants on exhaustive small cases") {
    const KdeConfig cfg;
    Stream rng(11);
    std::uniform_real_distribution<double> shift(-5.0, 5.0);
    for (std::size_t d = 1; d <= 3; ++d) {
        for (std::size_t n = 1; n <= 4; ++n) {
            for (int rep = 0; rep < 10; ++rep) {
                auto samples = random_samples(rng, n, d, 1.5);
                Vector target = random_samples(rng, 1, d, 1.0).front();
                Vector hdiag(d);
                for (double& h : hdiag) h = 0.2 + rng.uniform01();
                const BandwidthMatrix H(hdiag);
                const auto base = kde_log_likelihood(target, samples, H, cfg);

                CHECK(base.log_value ==
                      doctest::Approx(std::log(density_oracle(target, samples, hdiag))));

                // duplication
                for (std::size_t k = 2; k <= 3; ++k) {
                    std::vector<Vector> dup;
                    for (std::size_t c = 0; c < k; ++c) dup.insert(dup.end(), samples.begin(),
                                                                  samples.end());
                    CHECK(kde_log_likelihood(target, dup, H, cfg).log_value ==
                          doctest::Approx(base.log_value));
                }

                // translation
                Vector t(d);
                for (double& v : t) v = shift(rng);
                auto moved = samples;
                for (auto& s : moved) {
                    for (std::size_t i = 0; i < d; ++i) s[i] += t[i];
                }
                Vector moved_target = target;
                for (std::size_t i = 0; i < d; ++i) moved_target[i] += t[i];
                CHECK(kde_log_likelihood(moved_target, moved, H, cfg).log_value ==
                      doctest::Approx(base.log_value));
            }

            // det scaling at the center
            const Vector center(d, 0.7);
            const std::vector<Vector> at_center(n, center);
            const BandwidthMatrix H(Vector(d, 0.5));
            for (double s : {0.5, 2.0, 3.0}) {
                const BandwidthMatrix Hs(Vector(d, 0.5 * s * s));
                const double ratio =
                    std::exp(kde_log_likelihood(center, at_center, Hs, cfg).log_value -
                             kde_log_likelihood(center, at_center, H, cfg).log_value);
                CHECK(ratio == doctest::Approx(std::pow(s, -static_cast<double>(d))));
            }
        }
    }
}

TEST_CASE("kde config validation") {
    KdeConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.smoothing_window = 0;
    CHECK_THROWS(cfg.validate());
    cfg = KdeConfig{};
    cfg.zero_threshold = 1.0;
    CHECK_THROWS(cfg.validate());
    CHECK_THROWS_AS(BandwidthMatrix(Vector{1.0, 0.0}), DomainError);
}
