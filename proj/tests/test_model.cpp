#include "rwde/model.hpp"
#include "rwde/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace rwde;

namespace {

Rat r(const std::string& s) { return parse_rational(s); }

WeightSystem example_system() { return nn_weights(2, {r("2"), r("1"), r("1"), r("1")}); }

}  // namespace

TEST_CASE("mean drift of the running example", "[model]") {
    const auto w = example_system();
    REQUIRE(w.sigma() == 5);
    REQUIRE(w.mean_drift() == std::vector<Rat>{Rat(1, 5), Rat(0)});
}

TEST_CASE("mean drift vanishes for equal weights", "[model]") {
    const auto w = nn_weights(3, std::vector<Rat>(6, Rat(1)));
    REQUIRE(w.drift_is_zero());
}

TEST_CASE("mean drift in one dimension", "[model]") {
    const auto w = nn_weights(1, {r("3"), r("1")});
    REQUIRE(w.mean_drift() == std::vector<Rat>{Rat(1, 2)});
}

TEST_CASE("ballisticity margins", "[model]") {
    const auto w1 = nn_weights(2, {r("3"), r("1"), r("1"), r("1")});
    REQUIRE(w1.ballisticity_margin({1, 0}) == 7);

    const auto w2 = nn_weights(2, std::vector<Rat>(4, Rat(1)));
    REQUIRE(w2.ballisticity_margin({1, 0}) == 5);

    const auto w3 = nn_weights(1, {r("1/4"), r("1/4")});
    REQUIRE(w3.ballisticity_margin({1}) == Rat(-1, 2));
}

TEST_CASE("ballisticity margin needs the opposite step", "[model]") {
    const StepSet one_way(2, {{1, 0}, {0, 1}, {0, -1}});
    const WeightSystem w(one_way, {r("1"), r("1"), r("1")});
    REQUIRE_THROWS_AS(w.ballisticity_margin({1, 0}), std::invalid_argument);
}

TEST_CASE("sigma and drift are exact for random rational weights", "[model]") {
    CounterRng rng(derive_key(7, StreamTag::calibration));
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng.next_below(3));
        std::vector<Rat> alpha;
        for (int i = 0; i < 2 * d; ++i)
            alpha.emplace_back(Int(1 + rng.next_below(40)), Int(1 + rng.next_below(7)));
        const auto w = nn_weights(d, alpha);

        Rat sum = 0;
        for (const auto& a : alpha) sum += a;
        REQUIRE(w.sigma() == sum);

        // Sigma * Delta = sum_e alpha_e e, component-wise and exact
        for (int j = 0; j < d; ++j) {
            Rat rhs = 0;
            for (std::size_t s = 0; s < w.num_steps(); ++s) rhs += w.weight(s) * w.step(s)[j];
            REQUIRE(w.mean_drift()[j] * w.sigma() == rhs);
        }

        // sign(u . Delta) agrees with sign(sum_e alpha_e (u.e))
        IVec u(d);
        for (int j = 0; j < d; ++j) u[j] = static_cast<std::int64_t>(rng.next_below(9)) - 4;
        Rat direct = 0;
        for (std::size_t s = 0; s < w.num_steps(); ++s) direct += w.weight(s) * dot(u, w.step(s));
        const Rat via_drift = w.drift_dot(u);
        REQUIRE(((direct > 0 && via_drift > 0) || (direct < 0 && via_drift < 0) ||
                 (direct == 0 && via_drift == 0)));
    }
}

TEST_CASE("projection expectations", "[model]") {
    const auto w = example_system();
    const IVec u{2, 1};
    REQUIRE(w.mean_proj_pos(u) == 1);
    REQUIRE(w.mean_proj_neg(u) == Rat(3, 5));
    REQUIRE(w.mean_proj(u) == Rat(2, 5));
}

TEST_CASE("construction rejects invalid input", "[model]") {
    REQUIRE_THROWS_AS(StepSet(2, {{1, 0}, {1, 0}}), std::invalid_argument);   // duplicate
    REQUIRE_THROWS_AS(StepSet(2, {{0, 0}}), std::invalid_argument);           // zero step
    REQUIRE_THROWS_AS(StepSet(0, {}), std::invalid_argument);                 // bad dimension
    REQUIRE_THROWS_AS(StepSet(2, {{1, 0}, {-1, 0}}, true), std::invalid_argument);  // nn incomplete
    REQUIRE_THROWS_AS(nn_weights(2, {r("1"), r("1"), r("1")}), std::invalid_argument);
    REQUIRE_THROWS_AS(nn_weights(1, {r("1"), r("0")}), std::invalid_argument);
    REQUIRE_THROWS_AS(nn_weights(1, {r("1"), r("-1/2")}), std::invalid_argument);
}

TEST_CASE("rational parsing", "[model]") {
    REQUIRE(parse_rational("3/2") == Rat(3, 2));
    REQUIRE(parse_rational("0.25") == Rat(1, 4));
    REQUIRE(parse_rational("-1.5e2") == Rat(-150));
    REQUIRE(parse_rational("7") == 7);
    REQUIRE_THROWS(parse_rational("1/0"));
    REQUIRE_THROWS(parse_rational(""));
}
