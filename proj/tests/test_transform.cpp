#include "itslb/interp.hpp"
#include "itslb/parser.hpp"
#include "itslb/recurrence.hpp"
#include "itslb/transform.hpp"

#include <doctest.h>

#include <random>

using namespace itslb;

namespace {
const Var x("x"), y("y"), z("z"), u("u");
Expr X = expr(x), Y = expr(y), Z = expr(z), U = expr(u);
SmtSolver smt;

Rule rule_of(const std::string& text, size_t idx) {
    return parse_program(text).rules[idx];
}

// full loop-acceleration helper mirroring the pipeline
TransformedRule accelerate(const Rule& r) {
    auto m = find_metering(r, smt);
    REQUIRE(m);
    std::set<Var> used = r.all_vars();
    for (const auto& v : m->bound.vars()) used.insert(v);
    Var tv = fresh_var("tv", used);
    auto mu_it = iterated_update(update(r), tv);
    REQUIRE(mu_it);
    auto c_it = iterated_cost(r.cost, update(r), *mu_it, tv);
    REQUIRE(c_it);
    return accelerate_loop(r, *m, *mu_it, *c_it, tv, smt);
}

}  // namespace

TEST_CASE("accelerate alpha1") {
    Rule a1 = rule_of("START: f0\nf0(x,y,z,u) -> f1(x,y,z,u)\n"
                      "f1(x,y,z,u) -{1}-> f1(x-1,y+x,z,u) :|: x > 0\n", 1);
    TransformedRule acc = accelerate(a1);
    Var tv("tv");
    CHECK(acc.rule.cost == expr(tv));
    // guard simplifies to 0 < tv < x + 1
    Guard expect({constraint_gt(expr(tv)), constraint_gt(X + expr(1) - expr(tv))});
    CHECK(acc.rule.guard == expect);
    // rhs f1(x - tv, y + tv x - tv^2/2 + tv/2, z, u)
    const Term& t = acc.rule.rhs[0];
    CHECK(t.args[0] == X - expr(tv));
    CHECK(t.args[1] == Y + expr(tv) * X - Expr::constant(rat(1, 2)) * expr(tv) * expr(tv) +
                           Expr::constant(rat(1, 2)) * expr(tv));
    CHECK(well_formed(acc.rule));
}

TEST_CASE("accelerate with a rational bound") {
    Rule r = rule_of("START: f0\nf0(x) -> f(x)\nf(x) -{1}-> f(x-2) :|: 0 < x\n", 1);
    TransformedRule acc = accelerate(r);
    Var tv("tv");
    CHECK(acc.rule.rhs[0].args[0] == X - expr(2) * expr(tv));
    Guard expect({constraint_gt(expr(tv)),
                  constraint_gt(Expr::constant(rat(1, 2)) * X + expr(1) - expr(tv))});
    CHECK(acc.rule.guard == expect);
}

TEST_CASE("unbounded loop acceleration drops the upper bound") {
    Rule r = rule_of("START: f0\nf0(x,y) -> f(x,y)\nf(x,y) -{y}-> f(x+1,y) :|: 0 < x\n", 1);
    auto m = find_metering(r, smt);
    REQUIRE(m);
    REQUIRE(m->fresh_tv);
    std::set<Var> used = r.all_vars();
    for (const auto& v : m->bound.vars()) used.insert(v);
    Var tv1 = fresh_var("tv", used);
    auto mu_it = iterated_update(update(r), tv1);
    auto c_it = iterated_cost(r.cost, update(r), *mu_it, tv1);
    TransformedRule acc = accelerate_loop(r, *m, *mu_it, *c_it, tv1, smt);
    CHECK(acc.rule.cost == expr(tv1) * Y);
    Guard expect({constraint_gt(X), constraint_gt(expr(tv1))});
    CHECK(acc.rule.guard == expect);
    CHECK(acc.rule.rhs[0].args[0] == X + expr(tv1));
}

TEST_CASE("recursion acceleration") {
    Rule fib = rule_of("START: f0\nf0(x) -> fib(x)\n"
                       "fib(x) -{1}-> fib(x-1), fib(x-2) :|: x > 1\n", 1);
    auto m = find_metering_rec(fib, smt);
    REQUIRE(m);
    TransformedRule acc = accelerate_recursion(fib, *m, smt);
    // cost 2^(x/2 - 1) - 1, guard x > 1, rhs sink
    Expr expect = Expr::pow(expr(2), Expr::constant(rat(1, 2)) * X - expr(1)) - expr(1);
    CHECK(acc.rule.cost == expect);
    CHECK(acc.rule.guard == Guard({constraint_gt(X - expr(1))}));
    CHECK(acc.rule.rhs[0].root == kSinkSymbol);

    // formula instances for other degrees
    Rule d2 = rule_of("START: f0\nf0(x) -> g(x)\ng(x) -{1}-> g(x-1), g(x-1) :|: x > 0\n", 1);
    auto m2 = find_metering_rec(d2, smt);
    REQUIRE(m2);
    CHECK(accelerate_recursion(d2, *m2, smt).rule.cost ==
          Expr::pow(expr(2), X) - expr(1));

    Rule d3 = rule_of("START: f0\nf0(x) -> g(x)\n"
                      "g(x) -{1}-> g(x-1), g(x-1), g(x-1) :|: x > 0\n", 1);
    auto m3 = find_metering_rec(d3, smt);
    REQUIRE(m3);
    CHECK(accelerate_recursion(d3, *m3, smt).rule.cost ==
          Expr::constant(rat(1, 2)) * (Expr::pow(expr(3), X) - expr(1)));
}

TEST_CASE("recursion acceleration adds the cost >= 1 conjunct when needed") {
    Rule r = rule_of("START: f0\nf0(x,y) -> g(x,y)\n"
                     "g(x,y) -{y}-> g(x-1,y), g(x-2,y) :|: x > 1\n", 1);
    auto m = find_metering_rec(r, smt);
    REQUIRE(m);
    TransformedRule acc = accelerate_recursion(r, *m, smt);
    bool has_cost_conjunct = false;
    for (const auto& c : acc.rule.guard.conjuncts())
        if (c.lhs == Y - expr(1) && c.rel == Rel::Ge) has_cost_conjunct = true;
    CHECK(has_cost_conjunct);
}

TEST_CASE("instantiate") {
    Rule a1 = rule_of("START: f0\nf0(x,y,z,u) -> f1(x,y,z,u)\n"
                      "f1(x,y,z,u) -{1}-> f1(x-1,y+x,z,u) :|: x > 0\n", 1);
    TransformedRule acc = accelerate(a1);
    acc.rule.id = 7;
    Var tv("tv");
    TransformedRule inst = instantiate(acc.rule, tv, X, smt);
    CHECK(inst.rule.cost == X);
    CHECK(inst.rule.guard == Guard({constraint_gt(X)}));
    CHECK(inst.rule.rhs[0].args[0] == expr(0));
    CHECK(inst.rule.rhs[0].args[1] ==
          Y + Expr::constant(rat(1, 2)) * X * X + Expr::constant(rat(1, 2)) * X);

    // x/2 does not map to the integers: refused
    Rule r = rule_of("START: f0\nf0(x) -> f(x)\nf(x) -{tv}-> f(x-2*tv) :|: 0 < tv && "
                     "1/2*x + 1 - tv > 0\n", 1);
    CHECK_THROWS_AS(instantiate(r, tv, Expr::constant(rat(1, 2)) * X, smt), TransformError);
    // not a temporary
    CHECK_THROWS_AS(instantiate(r, x, expr(1), smt), TransformError);
}

TEST_CASE("instantiate_heuristic") {
    // tv > 0 gives the maximal lower bound 1
    Rule a4 = rule_of("START: f0\nf0(x,y,z,u) -> f3(x,y,z,u)\n"
                      "f3(x,y,z,u) -{1}-> f3(x,y,z,u-tv) :|: u > 0 && tv > 0\n", 1);
    auto h = instantiate_heuristic(a4, smt);
    REQUIRE(h);
    CHECK(h->first == Var("tv"));
    CHECK(h->second == expr(1));

    // 0 < tv < z gives the minimal upper bound z - 1 (preferred over the lower 1)
    Rule r = rule_of("START: f0\nf0(x,y,z,u) -> f2(x,y,z,u)\n"
                     "f2(x,y,z,u) -{1}-> f2(x,y,z-tv,u) :|: 0 < tv && tv < z\n", 1);
    auto h2 = instantiate_heuristic(r, smt);
    REQUIRE(h2);
    CHECK(h2->first == Var("tv"));
    CHECK(h2->second == Z - expr(1));

    // no bounded temporary
    Rule free_tv = rule_of("START: f0\nf0(x) -> f(x)\nf(x) -{tv}-> f(x-1) :|: x > 0\n", 1);
    CHECK_FALSE(instantiate_heuristic(free_tv, smt));
}

TEST_CASE("chain") {
    // alpha0 with the instantiated accelerated alpha1
    Rule a0 = rule_of("START: f0\nf0(x,y,z,u) -{1}-> f1(x,0,z,u)\n"
                      "f1(x,y,z,u) -{1}-> f1(x,y,z,u)\n", 0);
    Rule a1bar = rule_of(
        "START: f1\nf1(x,y,z,u) -{x}-> f1(0,y+1/2*x^2+1/2*x,z,u) :|: x > 0\n", 0);
    a1bar.id = 42;
    TransformedRule c = chain(a0, a1bar, 0, smt);
    CHECK(c.rule.lhs_root == "f0");
    CHECK(c.rule.cost == expr(1) + X);
    CHECK(c.rule.guard == Guard({constraint_gt(X)}));
    CHECK(c.rule.rhs[0].args[1] ==
          Expr::constant(rat(1, 2)) * X * X + Expr::constant(rat(1, 2)) * X);

    // facSum chained with the accelerated fac rule keeps the second term
    Rule facsum = rule_of("START: f0\nf0(x) -> facSum(x)\n"
                          "facSum(x) -{1}-> fac(x), facSum(x-1) :|: x > 0\n"
                          "fac(x) -{1}-> fac(x-1) :|: x > 1\n", 1);
    Rule facacc = rule_of("START: fac\nfac(x) -{x-1}-> fac(1) :|: x > 1\n", 0);
    size_t at = facsum.rhs[0].root == "fac" ? 0 : 1;
    TransformedRule fc = chain(facsum, facacc, at, smt);
    CHECK(fc.rule.cost == X);
    CHECK(fc.rule.guard == Guard({constraint_gt(X - expr(1))}));
    REQUIRE(fc.rule.rhs.size() == 2);
    std::set<std::string> roots{fc.rule.rhs[0].root, fc.rule.rhs[1].root};
    CHECK(roots == std::set<std::string>{"fac", "facSum"});

    // chaining with a no-op rule adds zero cost and no guard
    Rule noop = rule_of("START: g\ng(x) -{0}-> g(x)\n", 0);
    Rule caller = rule_of("START: h\nh(x) -{3}-> g(x+1)\ng(x) -{0}-> g(x)\n", 0);
    TransformedRule nc = chain(caller, noop, 0, smt);
    CHECK(nc.rule.cost == expr(3));
    CHECK(nc.rule.guard.is_true());

    CHECK_THROWS_AS(chain(caller, a1bar, 0, smt), TransformError);  // root mismatch
}

TEST_CASE("chain renames colliding temporaries") {
    Rule r1 = rule_of("START: f\nf(x) -{tv}-> g(x-tv) :|: tv > 0\ng(x) -> NIL\n", 0);
    Rule r2 = rule_of("START: g\ng(x) -{tv}-> NIL :|: tv > x\n", 0);
    TransformedRule c = chain(r1, r2, 0, smt);
    std::set<Var> temps = c.rule.temp_vars();
    CHECK(temps.size() == 2);
    // sampled cost law: cost(chain) = cost1 + cost2 mu for consistent valuations
    CHECK(well_formed(c.rule));
}

TEST_CASE("delete and partial delete") {
    Program p = parse_program("START: f\nf(x) -> f(x-1) :|: x > 0\n");
    RuleId id = p.rules[0].id;
    delete_rule(p, id);
    CHECK(p.rules.empty());
    CHECK_THROWS_AS(delete_rule(p, id), TransformError);

    Rule r = rule_of("START: f0\nf0(x,y) -> f(x,y)\n"
                     "f(x,y) -> f(x-1,y), f(x-y,y) :|: x > 0 && y > x\n", 1);
    TransformedRule pd = partial_delete(r, {0});
    CHECK(pd.rule.degree() == 1);
    CHECK(pd.rule.guard == r.guard);
    CHECK(pd.rule.cost == r.cost);
    TransformedRule empty = partial_delete(r, {});
    CHECK(empty.rule.rhs[0].root == kSinkSymbol);
    CHECK_THROWS_AS(partial_delete(r, {0, 1}), TransformError);  // not strict
}

TEST_CASE("soundness replay of loop acceleration") {
    Rule a1 = rule_of("START: f0\nf0(x,y,z,u) -> f1(x,y,z,u)\n"
                      "f1(x,y,z,u) -{1}-> f1(x-1,y+x,z,u) :|: x > 0\n", 1);
    TransformedRule acc = accelerate(a1);
    Var tv("tv");
    std::mt19937 rng(77);
    std::uniform_int_distribution<long> d(-20, 20);
    std::uniform_int_distribution<long> td(1, 15);
    int tested = 0;
    while (tested < 100) {
        std::map<Var, Rat> v{{x, Rat(d(rng))}, {y, Rat(d(rng))}, {z, Rat(d(rng))},
                             {u, Rat(d(rng))}, {tv, Rat(td(rng))}};
        if (!eval(acc.rule.guard, v)) continue;
        ++tested;
        // replay tv applications of the parent and compare costs and states
        long k = v.at(tv).get_num().get_si();
        std::map<Var, Rat> state = v;
        Rat total(0);
        for (long j = 0; j < k; ++j) {
            REQUIRE(eval(a1.guard, state));
            total += eval(a1.cost, state);
            std::map<Var, Rat> next = state;
            Subst mu = update(a1);
            for (const auto& var : a1.lhs_vars) next[var] = eval(mu.lookup(var), state);
            state = next;
        }
        CHECK(total == eval(acc.rule.cost, v));  // exact closed form
        for (size_t i2 = 0; i2 < a1.lhs_vars.size(); ++i2)
            CHECK(state[a1.lhs_vars[i2]] == eval(acc.rule.rhs[0].args[i2], v));
    }
}

TEST_CASE("chaining cost law, sampled") {
    Rule r1 = rule_of("START: f\nf(x,y) -{x}-> g(x+y,y) :|: x > 0\ng(x,y) -> NIL\n", 0);
    Rule r2 = rule_of("START: g\ng(x,y) -{x*y}-> NIL :|: x > y\n", 0);
    TransformedRule c = chain(r1, r2, 0, smt);
    Subst mu = c.prov.subst;
    std::mt19937 rng(5);
    std::uniform_int_distribution<long> d(-10, 10);
    int tested = 0;
    while (tested < 100) {
        std::map<Var, Rat> v{{x, Rat(d(rng))}, {y, Rat(d(rng))}};
        if (!eval(c.rule.guard, v)) continue;
        ++tested;
        Rat lhs = eval(c.rule.cost, v);
        Rat rhs = eval(r1.cost, v) + eval(apply(r2.cost, mu), v);
        CHECK(lhs == rhs);
    }
    CHECK(well_formed(c.rule));
}
