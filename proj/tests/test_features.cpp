#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "hrlp/features.hpp"

using namespace hrlp;

namespace {
Vocab three() {
    Vocab v;
    v.intern("Q1");
    v.intern("Q2");
    v.intern("Q3");
    return v;
}
}  // namespace

TEST_CASE("synthetic features are deterministic and label-keyed") {
    Vocab v = three();
    auto a = synthetic_features(v, 16, 7);
    auto b = synthetic_features(v, 16, 7);
    CHECK(a.rows == b.rows);

    // Different index assignment, same labels -> same per-label rows.
    Vocab w;
    w.intern("Q3");
    w.intern("Q1");
    w.intern("Q2");
    auto c = synthetic_features(w, 16, 7);
    for (int i = 0; i < 16; ++i) {
        CHECK(c.row(0)[i] == a.row(2)[i]);
        CHECK(c.row(1)[i] == a.row(0)[i]);
    }

    auto d = synthetic_features(v, 16, 8);
    CHECK(a.rows != d.rows);
}

TEST_CASE("synthetic rows are unit norm and pairwise distinct") {
    Vocab v = three();
    auto t = synthetic_features(v, 32, 1);
    for (EntityId e = 0; e < 3; ++e) {
        double norm = 0;
        for (std::size_t i = 0; i < t.dim; ++i) norm += t.row(e)[i] * t.row(e)[i];
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
    }
    double cos01 = 0;
    for (std::size_t i = 0; i < t.dim; ++i) cos01 += t.row(0)[i] * t.row(1)[i];
    CHECK(std::abs(cos01) < 0.999);
}

TEST_CASE("feature files round-trip and enforce shape") {
    Vocab v = three();
    auto t = synthetic_features(v, 8, 3);
    write_feature_file("feat_test.tsv", t, v);
    auto back = load_features("feat_test.tsv", v);
    CHECK(back.dim == 8);
    CHECK(back.rows == t.rows);
}

TEST_CASE("loading reports missing entities by label") {
    Vocab v = three();
    std::ofstream("feat_missing.tsv") << "Q1\t1.0\t0.0\nQ2\t0.0\t1.0\n";
    try {
        load_features("feat_missing.tsv", v);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("Q3") != std::string::npos);
    }
}

TEST_CASE("loading rejects ragged widths and non-finite values") {
    Vocab v = three();
    std::ofstream("feat_ragged.tsv") << "Q1\t1\t2\nQ2\t1\nQ3\t0\t0\n";
    CHECK_THROWS_AS(load_features("feat_ragged.tsv", v), FormatError);
    std::ofstream("feat_nan.tsv") << "Q1\t1\t2\nQ2\tnan\t1\nQ3\t0\t0\n";
    CHECK_THROWS_AS(load_features("feat_nan.tsv", v), FormatError);
}

TEST_CASE("wide tables load intact") {
    Vocab v = three();
    auto t = synthetic_features(v, 1024, 11);
    write_feature_file("feat_wide.tsv", t, v);
    auto back = load_features("feat_wide.tsv", v);
    CHECK(back.dim == 1024);
    for (std::size_t i = 0; i < back.rows.size(); ++i)
        CHECK(back.rows[i] == doctest::Approx(t.rows[i]).epsilon(1e-12));
}
