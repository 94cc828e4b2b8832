#include "itslb/recurrence.hpp"

#include <doctest.h>

#include <random>

using namespace itslb;

namespace {
const Var x("x"), y("y"), z("z"), u("u"), tv("tv"), i("i");
Expr X = expr(x), Y = expr(y), Z = expr(z), U = expr(u), TV = expr(tv), I = expr(i);

Subst iterate(const Subst& mu, int k) {
    Subst acc;
    for (int j = 0; j < k; ++j) acc = compose(acc, mu);
    return acc;
}
}  // namespace

TEST_CASE("iterated update: linear coupling") {
    Subst mu;
    mu.set(x, X - expr(1));
    mu.set(y, Y + X);
    auto it = iterated_update(mu, tv);
    REQUIRE(it);
    CHECK(it->lookup(x) == X - TV);
    CHECK(it->lookup(y) ==
          Y + TV * X - Expr::constant(rat(1, 2)) * TV * TV + Expr::constant(rat(1, 2)) * TV);
}

TEST_CASE("iterated update: geometric") {
    Subst mu;
    mu.set(x, X - expr(1));
    mu.set(y, expr(2) * Y);
    auto it = iterated_update(mu, tv);
    REQUIRE(it);
    CHECK(it->lookup(x) == X - TV);
    CHECK(it->lookup(y) == Expr::pow(expr(2), TV) * Y);
}

TEST_CASE("iterated update: identity and constants") {
    CHECK(iterated_update(Subst{}, tv)->empty());
    Subst mu;
    mu.set(u, expr(0));
    auto it = iterated_update(mu, tv);
    REQUIRE(it);
    CHECK(it->lookup(u) == expr(0));
}

TEST_CASE("unsolvable shapes") {
    Subst swap;
    swap.set(x, Y);
    swap.set(y, X);
    CHECK_FALSE(iterated_update(swap, tv));  // mutual recursion

    Subst sq;
    sq.set(x, X * X);
    CHECK_FALSE(iterated_update(sq, tv));  // nonlinear self-update

    Subst neg;
    neg.set(x, expr(-2) * X);
    CHECK_FALSE(iterated_update(neg, tv));  // negative multiplier
}

TEST_CASE("iterated cost") {
    // c = 1: tv
    Subst mu;
    mu.set(x, X - expr(1));
    auto it = iterated_update(mu, tv);
    REQUIRE(it);
    CHECK(*iterated_cost(expr(1), mu, *it, tv) == TV);

    // c = y with y' = 2y: (2^tv - 1) * y
    Subst mg;
    mg.set(x, X - expr(1));
    mg.set(y, expr(2) * Y);
    auto itg = iterated_update(mg, tv);
    REQUIRE(itg);
    CHECK(*iterated_cost(Y, mg, *itg, tv) == (Expr::pow(expr(2), TV) - expr(1)) * Y);

    // c = 1 + z with z' = z - 1: tv*z - tv^2/2 + 3tv/2
    Subst mz;
    mz.set(z, Z - expr(1));
    mz.set(u, expr(0));
    auto itz = iterated_update(mz, tv);
    REQUIRE(itz);
    Expr expect = TV * Z - Expr::constant(rat(1, 2)) * TV * TV +
                  Expr::constant(rat(3, 2)) * TV;
    CHECK(*iterated_cost(expr(1) + Z, mz, *itz, tv) == expect);

    // a cost reading a variable that is reset to a constant is out of scope
    CHECK_FALSE(iterated_cost(U, mz, *itz, tv));
}

TEST_CASE("poly_sum") {
    CHECK(*poly_sum(expr(1), i, tv) == TV);
    CHECK(*poly_sum(I, i, tv) ==
          Expr::constant(rat(1, 2)) * TV * TV - Expr::constant(rat(1, 2)) * TV);
    Expr p = expr(1) + Z - I;
    Expr expect = TV * Z - Expr::constant(rat(1, 2)) * TV * TV +
                  Expr::constant(rat(3, 2)) * TV;
    CHECK(*poly_sum(p, i, tv) == expect);
    // degree cap
    CHECK_FALSE(poly_sum(Expr::pow(I, expr(7)), i, tv));
    // direct-summation cross-check for degrees up to 6
    for (int d = 0; d <= 6; ++d) {
        Expr s = *poly_sum(Expr::pow(I, expr(d)), i, tv);
        for (long m = 1; m <= 10; ++m) {
            Rat direct(0);
            for (long k = 0; k < m; ++k) direct += eval(Expr::pow(I, expr(d)), {{i, Rat(k)}});
            CHECK(eval(s, {{tv, Rat(m)}}) == direct);
        }
    }
}

TEST_CASE("unrolling equivalence") {
    std::vector<Subst> cases;
    {
        Subst mu;
        mu.set(x, X - expr(1));
        mu.set(y, Y + X);
        cases.push_back(mu);
    }
    {
        Subst mu;
        mu.set(x, X - expr(1));
        mu.set(y, expr(2) * Y);
        cases.push_back(mu);
    }
    {
        Subst mu;
        mu.set(z, Z - expr(1));
        mu.set(u, expr(0));
        cases.push_back(mu);
    }
    {
        Subst mu;
        mu.set(x, expr(3) * X + expr(2));
        cases.push_back(mu);
    }
    for (const auto& mu : cases) {
        auto it = iterated_update(mu, tv);
        REQUIRE(it);
        for (int k = 1; k <= 10; ++k) {
            Subst direct = iterate(mu, k);
            Subst at_k;
            at_k.set(tv, expr(k));
            for (const auto& [v, e] : mu.bindings())
                CHECK(apply(it->lookup(v), at_k) == direct.lookup(v));
        }
    }
}

TEST_CASE("cost equivalence") {
    Subst mu;
    mu.set(x, X - expr(1));
    mu.set(y, Y + X);
    auto it = iterated_update(mu, tv);
    Expr cost = expr(1) + X;
    auto cit = iterated_cost(cost, mu, *it, tv);
    REQUIRE(cit);
    for (int k = 1; k <= 10; ++k) {
        Expr direct;
        for (int j = 0; j < k; ++j) direct += apply(cost, iterate(mu, j));
        Subst at_k;
        at_k.set(tv, expr(k));
        CHECK(apply(*cit, at_k) == direct);
    }
}

TEST_CASE("closed forms map integers to integers") {
    Subst mu;
    mu.set(x, X - expr(1));
    mu.set(y, Y + X);
    auto it = iterated_update(mu, tv);
    REQUIRE(it);
    std::mt19937 rng(10);
    std::uniform_int_distribution<long> d(-30, 30);
    std::uniform_int_distribution<long> kd(1, 12);
    for (int round = 0; round < 200; ++round) {
        std::map<Var, Rat> v{{x, Rat(d(rng))}, {y, Rat(d(rng))}, {tv, Rat(kd(rng))}};
        for (const auto& [var, e] : it->bindings()) CHECK(is_integer(eval(e, v)));
    }
}
