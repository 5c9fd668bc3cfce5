#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace oneill;
using namespace oneill::testing;

TEST(Catalog, RequiredEntriesPresent)
{
    std::set<std::string> ids;
    for (const CatalogEntry& e : catalog()) {
        EXPECT_TRUE(ids.insert(e.id).second) << "duplicate id " << e.id;
        EXPECT_FALSE(e.summary.empty()) << e.id;
    }
    for (const char* id : {"lorentz-flat-torus", "warped-lorentz-t3", "hopf", "clairaut-cosh", "critical-exp",
                           "perturbed-nonumbilic"})
        EXPECT_TRUE(ids.count(id)) << id;
}

TEST(Catalog, EveryEntryLoadsWithConfirmedTags)
{
    for (const CatalogEntry& e : catalog()) {
        LoadedCase lc;
        ASSERT_NO_THROW(lc = load_case(e.id)) << e.id;
        ASSERT_TRUE(lc.submersion) << e.id;
        EXPECT_EQ(lc.total.get(), lc.submersion->total.get()) << e.id;
        EXPECT_TRUE(validate(*lc.submersion).ok()) << e.id;
        if (e.curvature) {
            EXPECT_TRUE(e.has_tag("constant_curvature")) << e.id;
            EXPECT_NEAR(lc.fitted_curvature, *e.curvature, 1e-7) << e.id;
        }
    }
}

TEST(Catalog, UnknownIdThrows)
{
    EXPECT_THROW(load_case("no-such-case"), CatalogError);
    EXPECT_THROW(catalog_entry("no-such-case"), CatalogError);
}

TEST(Catalog, ExpectedOutcomesNameRealIdentities)
{
    const auto& names = identity_names();
    for (const CatalogEntry& e : catalog())
        for (const ExpectedOutcome& x : e.expected) {
            EXPECT_NE(std::find(names.begin(), names.end(), x.identity), names.end()) << e.id << ": " << x.identity;
            EXPECT_FALSE(x.note.empty()) << e.id << ": " << x.identity;
        }
}

TEST(Catalog, SpecificEntryShapes)
{
    const LoadedCase flat = load_case("lorentz-flat-torus");
    EXPECT_EQ(flat.total->dim, 2);
    EXPECT_EQ(flat.submersion->fibre_dim, 1);
    EXPECT_TRUE(flat.entry.has_tag("totally_geodesic"));
    EXPECT_TRUE(flat.entry.has_tag("compact"));
    EXPECT_TRUE(flat.entry.has_tag("aligned"));

    const LoadedCase t3 = load_case("warped-lorentz-t3");
    EXPECT_EQ(t3.submersion->fibre_dim, 2);
    EXPECT_EQ(t3.total->signature, 2);
    EXPECT_EQ(t3.submersion->base->signature, 0);

    const LoadedCase hopf = load_case("hopf");
    EXPECT_EQ(hopf.total->dim, 3);
    EXPECT_EQ(hopf.submersion->base->dim, 2);
    EXPECT_EQ(hopf.total->signature, 0);

    const LoadedCase cc = load_case("clairaut-cosh");
    EXPECT_TRUE(cc.entry.has_tag("clairaut"));
    ASSERT_TRUE(cc.entry.girth);
    EXPECT_FALSE(cc.entry.has_tag("constant_curvature"));

    const LoadedCase ce = load_case("critical-exp");
    EXPECT_NEAR(ce.fitted_curvature, -1.0, 1e-7);

    const LoadedCase pert = load_case("perturbed-nonumbilic");
    EXPECT_FALSE(pert.entry.has_tag("umbilic"));
    EXPECT_EQ(pert.entry.expected_outcome("ranjan"), Outcome::Skip);
    EXPECT_EQ(pert.entry.expected_outcome("mixed_c"), Outcome::Pass);
}

TEST(Catalog, WrongTagsAreCaught)
{
    {
        CatalogEntry e = catalog_entry("perturbed-nonumbilic");
        e.tags.push_back("umbilic");
        LoadedCase lc = parse_case(e);
        EXPECT_NE(confirm_tags(lc).find("tag umbilic"), std::string::npos);
    }
    {
        CatalogEntry e = catalog_entry("lorentz-flat-torus");
        e.curvature = 1.0;
        LoadedCase lc = parse_case(e);
        EXPECT_NE(confirm_tags(lc).find("fitted c"), std::string::npos);
    }
    {
        CatalogEntry e = catalog_entry("warped-lorentz-t3");
        e.tags.push_back("constant_curvature");
        LoadedCase lc = parse_case(e);
        EXPECT_NE(confirm_tags(lc).find("fit residual"), std::string::npos);
    }
    {
        CatalogEntry e = catalog_entry("warped-lorentz-t3");
        e.tags.push_back("totally_geodesic");
        LoadedCase lc = parse_case(e);
        EXPECT_NE(confirm_tags(lc).find("tag totally_geodesic"), std::string::npos);
    }
    {
        CatalogEntry e = catalog_entry("hopf");
        e.tags.push_back("warped");
        LoadedCase lc = parse_case(e);
        EXPECT_NE(confirm_tags(lc).find("tag warped"), std::string::npos);
    }
    {
        CatalogEntry e = catalog_entry("clairaut-cosh");
        e.tags.push_back("compact");
        LoadedCase lc = parse_case(e);
        EXPECT_NE(confirm_tags(lc).find("tag compact"), std::string::npos);
    }
}

TEST(Catalog, BrokenSourceIsCatalogError)
{
    CatalogEntry e = catalog_entry("hopf");
    e.dsl_source = "manifold X { dim 2 coords a }";
    EXPECT_THROW(parse_case(e), CatalogError);
}

TEST(Catalog, LoadIsCached)
{
    const LoadedCase a = load_case("hopf");
    const LoadedCase b = load_case("hopf");
    EXPECT_EQ(a.submersion.get(), b.submersion.get());
}
