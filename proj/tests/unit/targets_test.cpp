#include <gtest/gtest.h>

#include <cmath>

#include "qseg/error.hpp"
#include "qseg/targets.hpp"

using namespace qseg;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(TargetSpec, Validate) {
    TargetSpec s{TargetKind::Synthetic, "t", "", {{"x"}, {"b"}}};
    EXPECT_NO_THROW(s.validate());
    EXPECT_EQ(s.arity(), 2u);
    EXPECT_NE(s.find("b"), nullptr);
    EXPECT_EQ(s.find("m"), nullptr);

    s.variables = {};
    EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
    s.variables = {{"x"}, {"x"}};
    EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
    s.variables = {{""}};
    EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvalidArgument);
}

TEST(TargetKinds, RoundTripNames) {
    for (auto k : {TargetKind::Builtin, TargetKind::External, TargetKind::Synthetic})
        EXPECT_EQ(parse_target_kind(to_string(k)), k);
    for (auto c : {ClockKind::ProcessCpu, ClockKind::ChildCpu, ClockKind::Wall, ClockKind::Synthetic})
        EXPECT_EQ(parse_clock_kind(to_string(c)), c);
    EXPECT_EQ(kind_of([] { parse_target_kind("nope"); }), ErrorKind::ParseError);
}

TEST(Builtins, DeclaredVariablesAndGrids) {
    const std::map<std::string, std::vector<std::string>> vars{
        {"binary-search", {"x"}}, {"merge-sort", {"x"}}, {"search-sort", {"x", "b"}}, {"custom", {"m", "x", "b"}}};
    EXPECT_EQ(builtin_names().size(), vars.size());
    for (const auto& [name, want] : vars) {
        const auto t = make_builtin(name);
        std::vector<std::string> got;
        for (const auto& v : t->spec().variables) got.push_back(v.name);
        EXPECT_EQ(got, want) << name;
        EXPECT_EQ(t->spec().kind, TargetKind::Builtin);
        EXPECT_EQ(t->clock(), ClockKind::ProcessCpu);
        const auto grids = default_grids(name);
        for (const auto& v : want) {
            ASSERT_TRUE(grids.contains(v)) << name << ":" << v;
            const auto& g = grids.at(v);
            EXPECT_EQ(g.size(), 7u);
            EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
        }
    }
    EXPECT_EQ(kind_of([] { make_builtin("quick-sort"); }), ErrorKind::InvalidArgument);
}

TEST(Builtins, RunSmallInputs) {
    auto bs = make_builtin("binary-search");
    EXPECT_GE(bs->run({{"x", 0}}, 1), 0.0);
    EXPECT_GE(bs->run({{"x", 1000}}, 1), 0.0);
    EXPECT_EQ(kind_of([&] { bs->run({}, 1); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { bs->run({{"x", -4}}, 1); }), ErrorKind::InvalidArgument);

    auto ss = make_builtin("search-sort");
    EXPECT_GE(ss->run({{"x", 64}, {"b", 0}}, 2), 0.0);
    EXPECT_GE(ss->run({{"x", 64}, {"b", 100}}, 2), 0.0);

    auto cu = make_builtin("custom");
    EXPECT_GE(cu->run({{"m", 0}, {"x", 50}, {"b", 4}}, 3), 0.0);
}

TEST(External, ExitStatusDecidesSuccess) {
    auto ok = make_external("true", {"x"});
    EXPECT_EQ(ok->spec().kind, TargetKind::External);
    EXPECT_EQ(ok->clock(), ClockKind::ChildCpu);
    EXPECT_GE(ok->run({{"x", 3}}, 0), 0.0);

    auto bad = make_external("false", {"x"});
    EXPECT_EQ(kind_of([&] { bad->run({{"x", 3}}, 0); }), ErrorKind::TargetFailure);

    auto missing = make_external("/nonexistent/qseg-target", {"x"});
    EXPECT_EQ(kind_of([&] { missing->run({{"x", 3}}, 0); }), ErrorKind::TargetFailure);
}

TEST(Synthetic, ValuesAndNoise) {
    auto t = make_synthetic("lg", {{"x"}}, [](const ArgMap& a) { return std::log2(double(a.at("x"))); });
    EXPECT_EQ(t->clock(), ClockKind::Synthetic);
    EXPECT_DOUBLE_EQ(t->run({{"x", 1024}}, 9), 10.0);

    auto noisy = make_synthetic("lg", {{"x"}}, [](const ArgMap&) { return 1.0; }, 0.05);
    const double a = noisy->run({{"x", 8}}, 42);
    EXPECT_EQ(noisy->run({{"x", 8}}, 42), a);
    EXPECT_NE(noisy->run({{"x", 8}}, 43), a);
    EXPECT_NEAR(a, 1.0, 0.5);

    auto inf = make_synthetic("inf", {{"x"}}, [](const ArgMap&) { return INFINITY; });
    EXPECT_EQ(kind_of([&] { inf->run({{"x", 1}}, 0); }), ErrorKind::TargetFailure);
}

TEST(Clock, ResolutionIsSane) {
    const double r = cpu_clock_resolution();
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 0.02);
    const double t0 = process_cpu_seconds();
    volatile double acc = 0;
    for (int i = 0; i < 2000000; ++i) acc = acc + std::sqrt(double(i));
    EXPECT_GT(process_cpu_seconds(), t0);
}
