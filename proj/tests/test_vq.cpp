#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "rng.hpp"
#include "vq/codebook.hpp"

using namespace abdgen;
using namespace abdgen::vq;
using abdgen::math::Tensor;

namespace {
Tensor rows(std::initializer_list<std::initializer_list<double>> vals) {
    std::size_t r = vals.size(), c = vals.begin()->size();
    Tensor t{{r, c}};
    std::size_t i = 0;
    for (const auto& row : vals)
        for (double v : row) t.data[i++] = v;
    return t;
}
}  // namespace

TEST_CASE("ground: distance softmax probabilities and tie-breaks") {
    SUBCASE("equidistant two-value symbol splits mass and picks the low index") {
        Tensor cb = rows({{1.0, 0.0}, {-1.0, 0.0}});
        Tensor z = Tensor::vec({0.0, 0.5});
        auto g = ground_one(z, cb);
        CHECK(g.probs[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(g.probs[1] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(g.value == 0);
    }
    SUBCASE("distances 0 and ln 3 give probabilities 3/4 and 1/4") {
        Tensor cb = rows({{0.0}, {std::log(3.0)}});
        Tensor z = Tensor::vec({0.0});
        auto g = ground_one(z, cb);
        CHECK(g.probs[0] == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(g.probs[1] == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(g.value == 0);
    }
    SUBCASE("three equidistant values split evenly") {
        Tensor cb = rows({{1.0, 0.0}, {-0.5, 0.8660254037844386},
                          {-0.5, -0.8660254037844386}});
        Tensor z = Tensor::vec({0.0, 0.0});
        auto g = ground_one(z, cb);
        for (double p : g.probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch") {
        Tensor cb = rows({{0.0, 1.0}});
        CHECK_THROWS_AS(ground_one(Tensor::vec({0.0}), cb), DimensionMismatch);
    }
}

TEST_CASE("ground properties: normalization, duality, translation equivariance") {
    Rng rng(21);
    for (int round = 0; round < 300; ++round) {
        std::size_t k = 2 + rng.index(7), e = 1 + rng.index(8);
        Tensor cb{{k, e}};
        for (double& v : cb.data) v = rng.uniform(-2.0, 2.0);
        Tensor z{{e}};
        for (double& v : z.data) v = rng.uniform(-2.0, 2.0);

        auto g = ground_one(z, cb);
        double sum = 0.0;
        for (double p : g.probs) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-9);

        // argmax of probs equals argmin of distances
        std::size_t dmin = 0;
        auto dist = [&](std::size_t r) {
            double s = 0.0;
            for (std::size_t c = 0; c < e; ++c) {
                double d = z[c] - cb.at2(r, c);
                s += d * d;
            }
            return s;
        };
        for (std::size_t r = 1; r < k; ++r)
            if (dist(r) < dist(dmin)) dmin = r;
        CHECK(g.value == dmin);

        // translating z and all rows leaves probs unchanged
        Tensor z2 = z, cb2 = cb;
        std::vector<double> shift(e);
        for (std::size_t c = 0; c < e; ++c) shift[c] = rng.uniform(-3.0, 3.0);
        for (std::size_t c = 0; c < e; ++c) z2[c] += shift[c];
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < e; ++c) cb2.at2(r, c) += shift[c];
        auto g2 = ground_one(z2, cb2);
        for (std::size_t r = 0; r < k; ++r)
            CHECK(std::abs(g.probs[r] - g2.probs[r]) < 1e-9);
    }
}

TEST_CASE("retrieve fetches exact rows and validates the range") {
    Tensor cb = rows({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
    Tensor row0 = retrieve_one(0, cb);
    CHECK(row0[0] == 1.0);
    CHECK(row0[1] == 2.0);
    CHECK_THROWS_AS(retrieve_one(3, cb), ValueOutOfRange);

    SUBCASE("ground(retrieve(Y)) round-trips when rows are distinct") {
        Rng rng(77);
        for (int round = 0; round < 50; ++round) {
            std::size_t k = 2 + rng.index(7);
            Tensor book = init_codebook(k, 8, rng);  // min pairwise distance enforced
            for (std::size_t v = 0; v < k; ++v) {
                auto g = ground_one(retrieve_one(v, book), book);
                CHECK(g.value == v);
            }
        }
    }
}

TEST_CASE("bind_negative picks the nearest positive slot") {
    std::vector<std::pair<SlotRef, Tensor>> positives;
    positives.push_back({{"p0", 0, 0}, Tensor::vec({0.0, 0.0})});
    positives.push_back({{"p0", 1, 0}, Tensor::vec({2.0, 0.0})});

    SUBCASE("exact match binds at distance zero") {
        auto b = bind_negative({"n0", 0, 0}, Tensor::vec({2.0, 0.0}), positives);
        CHECK(b.bound_to.image_index == 1);
    }
    SUBCASE("nearer of two wins") {
        auto b = bind_negative({"n0", 1, 0}, Tensor::vec({1.5, 0.0}), positives);
        CHECK(b.bound_to.image_index == 1);
        auto b2 = bind_negative({"n0", 2, 0}, Tensor::vec({0.4, 0.0}), positives);
        CHECK(b2.bound_to.image_index == 0);
    }
    SUBCASE("ties go to the lowest positive index") {
        auto b = bind_negative({"n0", 0, 0}, Tensor::vec({1.0, 0.0}), positives);
        CHECK(b.bound_to.image_index == 0);
        CHECK(b.negative_slot.case_id == "n0");
    }
    SUBCASE("no positives is an error") {
        CHECK_THROWS_AS(
            bind_negative({"n0", 0, 0}, Tensor::vec({0.0, 0.0}), {}),
            EmptyPositives);
    }
}

TEST_CASE("codebook initialization keeps rows separated") {
    Rng rng(5);
    for (int round = 0; round < 20; ++round) {
        Tensor cb = init_codebook(9, 16, rng);
        for (std::size_t a = 0; a < 9; ++a) {
            for (double v : std::vector<double>(cb.data.begin() + a * 16,
                                                cb.data.begin() + (a + 1) * 16)) {
                CHECK(v >= -0.5);
                CHECK(v <= 0.5);
            }
            for (std::size_t b = 0; b < a; ++b) {
                double s = 0.0;
                for (std::size_t c = 0; c < 16; ++c) {
                    double d = cb.at2(a, c) - cb.at2(b, c);
                    s += d * d;
                }
                CHECK(std::sqrt(s) > 0.1);
            }
        }
    }
}
