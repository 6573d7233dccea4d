#include <doctest.h>

#include <cmath>
#include <random>

#include "rfidzone/error.hpp"
#include "rfidzone/metrics.hpp"

using namespace rfidzone;

namespace {

using L = std::vector<std::size_t>;

std::pair<L, L> random_labels(std::mt19937_64& gen, std::size_t n, std::size_t k, double hit_rate) {
    L y(n), p(n);
    std::bernoulli_distribution hit(hit_rate);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = gen() % k;
        p[i] = hit(gen) ? y[i] : gen() % k;
    }
    return {y, p};
}

}  // namespace

TEST_CASE("confusion matrix") {
    const L y = {0, 0, 1}, p = {0, 1, 1};
    const ConfusionMatrix c = confusion(y, p, 2);
    CHECK(c(0, 0) == 1);
    CHECK(c(0, 1) == 1);
    CHECK(c(1, 0) == 0);
    CHECK(c(1, 1) == 1);
    CHECK(c.total() == 3);
    CHECK(c.trace() == 2);
    CHECK(c.row_sum(0) == 2);
    CHECK(c.col_sum(1) == 2);

    const ConfusionMatrix single = confusion(L{0}, L{1}, 3);
    CHECK(single(0, 1) == 1);
    CHECK(single.total() == 1);

    CHECK_THROWS_AS(confusion(L{0, 1}, L{0}, 2), ValidationError);
    CHECK_THROWS_AS(confusion(L{}, L{}, 2), ValidationError);
    CHECK_THROWS_AS(confusion(L{2}, L{0}, 2), ValidationError);
}

TEST_CASE("per-class scores") {
    const auto s = per_class_prf(confusion(L{0, 0, 1}, L{0, 1, 1}, 2));
    CHECK(s[0].precision == 1.0);
    CHECK(s[0].recall == 0.5);
    CHECK(s[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s[1].precision == 0.5);
    CHECK(s[1].recall == 1.0);
    CHECK(s[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s[0].support == 2);

    // Class 2 is never true and never predicted.
    const auto z = per_class_prf(confusion(L{0, 1}, L{0, 1}, 3));
    CHECK(z[2].precision == 0.0);
    CHECK(z[2].recall == 0.0);
    CHECK(z[2].f1 == 0.0);
    CHECK(z[0].f1 == 1.0);
}

TEST_CASE("aggregates") {
    const auto a = macro_micro(confusion(L{0, 0, 1}, L{0, 1, 1}, 2));
    CHECK(a.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(a.micro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto d = macro_micro(confusion(L{0, 1, 2}, L{0, 1, 2}, 3));
    CHECK(d.macro_f1 == 1.0);
    CHECK(d.micro_f1 == 1.0);
    // An unsupported class counts in the macro average.
    CHECK(macro_micro(confusion(L{0, 1}, L{0, 1}, 3)).macro_f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("accuracy") {
    CHECK(accuracy(L{1, 2, 3}, L{1, 2, 3}) == 1.0);
    CHECK(accuracy(L{1, 2, 3}, L{0, 0, 0}) == 0.0);
    CHECK(accuracy(L{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, L{0, 0, 0, 1, 1, 1, 1, 1, 1, 1}) == doctest::Approx(0.3));
}

TEST_CASE("adjacency-aware accuracy on the bundled lattice") {
    const AdjacencyGraph g = adjacency(default_floorplan());
    // Truth LabZoneA (0); predictions cycle B (adjacent), E (adjacent), F (not adjacent).
    const L y(9, 0);
    const L p = {1, 4, 5, 1, 4, 5, 1, 4, 5};
    CHECK(adjacency_accuracy(y, p, g) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(adjacency_accuracy(y, y, g) == 1.0);
    const AdjacencyGraph self = AdjacencyGraph::self_only(g.zones());
    CHECK(adjacency_accuracy(y, p, self) == accuracy(y, p));
}

TEST_CASE("cost risk") {
    const AdjacencyGraph g = adjacency(default_floorplan());
    const CostMatrix lambda = CostMatrix::from_adjacency(g, 1.0, 5.0);
    CHECK(lambda(0, 0) == 0.0);
    CHECK(lambda(0, 1) == 1.0);
    CHECK(lambda(0, 5) == 5.0);
    // Two adjacent errors, one non-adjacent, seven hits.
    const L y(10, 0);
    const L p = {1, 4, 5, 0, 0, 0, 0, 0, 0, 0};
    CHECK(cost_risk(y, p, lambda) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(cost_risk(y, y, lambda) == 0.0);

    CHECK_THROWS_AS(CostMatrix(2, {1, 1, 1, 0}), ValidationError);
    CHECK_THROWS_AS(CostMatrix(2, {0, -1, 1, 0}), ValidationError);
    CHECK_THROWS_AS(CostMatrix(2, {0, 1, 1}), ValidationError);
}

TEST_CASE("identities over random label sets") {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 2 + gen() % 11;
        const std::size_t n = 1 + gen() % 300;
        const auto [y, p] = random_labels(gen, n, k, 0.4);
        const ConfusionMatrix c = confusion(y, p, k);
        const double acc = accuracy(y, p);
        const Aggregates a = macro_micro(c);
        CHECK(a.micro_f1 == acc);
        CHECK(a.micro_precision == acc);
        CHECK(a.micro_recall == acc);
        CHECK(cost_risk(y, p, CostMatrix::zero_one(k)) == doctest::Approx(1.0 - acc).epsilon(1e-15));
        CHECK(a.macro_f1 >= 0.0);
        CHECK(a.macro_f1 <= 1.0);
        CHECK(c.total() == n);
        for (std::size_t i = 0; i < k; ++i)
            CHECK(c.row_sum(i) == static_cast<std::uint64_t>(std::count(y.begin(), y.end(), i)));
        // Any reflexive graph relaxes accuracy.
        AdjacencyGraph g = AdjacencyGraph::self_only(std::vector<std::string>(k, "z"));
        for (std::size_t e = 0; e < k; ++e) g.connect(gen() % k, gen() % k);
        CHECK(adjacency_accuracy(y, p, g) >= acc);
    }
}

TEST_CASE("quantiles interpolate linearly") {
    const std::vector<double> v = {1.0, 2.0, 4.0, 8.0};
    CHECK(quantile_sorted(v, 0.0) == 1.0);
    CHECK(quantile_sorted(v, 1.0) == 8.0);
    CHECK(quantile_sorted(v, 0.5) == 3.0);
    CHECK(quantile_sorted(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(std::vector<double>{5.0}, 0.3) == 5.0);
}

TEST_CASE("bootstrap intervals") {
    std::mt19937_64 gen(43);
    const auto [y, p] = random_labels(gen, 500, 6, 0.35);
    const Metric acc = [](Labels a, Labels b) { return accuracy(a, b); };

    SUBCASE("constant metric gives a degenerate interval") {
        const Interval iv = bootstrap_ci(acc, y, y, 200, 0.95, 1);
        CHECK(iv.lower == 1.0);
        CHECK(iv.upper == 1.0);
        CHECK(iv.point == 1.0);
    }
    SUBCASE("one resample") {
        const Interval iv = bootstrap_ci(acc, y, p, 1, 0.95, 1);
        CHECK(iv.lower == iv.upper);
    }
    SUBCASE("reproducible, thread independent and containing the estimate") {
        const Interval a = bootstrap_ci(acc, y, p, 1000, 0.95, 42);
        const Interval b = bootstrap_ci(acc, y, p, 1000, 0.95, 42);
        const Interval c = bootstrap_ci(acc, y, p, 1000, 0.95, 42, 4);
        CHECK(a.lower == b.lower);
        CHECK(a.upper == b.upper);
        CHECK(a.lower == c.lower);
        CHECK(a.upper == c.upper);
        CHECK(a.lower <= a.point);
        CHECK(a.point <= a.upper);
        CHECK(a.point == accuracy(y, p));
        CHECK(a.upper - a.lower < 0.15);
    }
    SUBCASE("nested in level") {
        double lo = 2.0, hi = -1.0;
        for (double level : {0.5, 0.8, 0.9, 0.95, 0.99}) {
            const Interval iv = bootstrap_ci(acc, y, p, 500, level, 7);
            CHECK(iv.lower <= lo);
            CHECK(iv.upper >= hi);
            lo = iv.lower;
            hi = iv.upper;
        }
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(bootstrap_ci(acc, y, p, 0, 0.95, 1), ValidationError);
        CHECK_THROWS_AS(bootstrap_ci(acc, y, p, 10, 1.0, 1), ValidationError);
    }
}

TEST_CASE("evaluate bundles every metric") {
    std::mt19937_64 gen(47);
    const auto [y, p] = random_labels(gen, 400, 12, 0.4);
    const AdjacencyGraph g = adjacency(default_floorplan());
    EvalOptions opt;
    opt.bootstrap_resamples = 200;
    const EvalReport r = evaluate(g.zones(), y, p, g, CostMatrix::from_adjacency(g), opt);
    CHECK(r.n == 400);
    CHECK(r.accuracy == accuracy(y, p));
    CHECK(r.adjacency_accuracy == adjacency_accuracy(y, p, g));
    CHECK(r.intervals.size() == 5);
    for (const auto& [name, iv] : r.intervals) {
        CHECK(iv.lower <= iv.point);
        CHECK(iv.point <= iv.upper);
    }
}
