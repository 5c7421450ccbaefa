#include <algorithm>
#include <filesystem>

#include <gtest/gtest.h>

#include "genworld/daedalus.hpp"

using namespace genworld;
using namespace genworld::daedalus;

namespace {

const std::vector<std::string> kWords = {"glass", "tree",  "apple", "red",    "stone", "tower", "bench", "chair",
                                         "moss",  "crystal", "oak", "wooden", "tall",  "round", "blue",  "candy"};

std::string random_phrase(Rng& rng) {
    std::string s;
    const int n = static_cast<int>(rng.uniform_int(1, 4));
    for (int i = 0; i < n; ++i) {
        if (i) s += ' ';
        s += kWords[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(kWords.size()) - 1))];
    }
    return s;
}

Sprite random_sprite(Rng& rng, int w, int h) {
    Sprite s(w, h);
    for (auto& p : s.pixels)
        p = {static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
             static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
    return s;
}

std::vector<Rgba> test_palette() {
    return {{0, 0, 0, 255},     {255, 255, 255, 255}, {200, 40, 40, 255}, {40, 160, 60, 255},
            {40, 60, 200, 255}, {220, 200, 60, 255},  {120, 80, 40, 255}, {128, 128, 128, 255}};
}

}  // namespace

// ------------------------------ Palette ------------------------------

TEST(Palette, NearestMatchesBruteForce) {
    Rng rng(31);
    const auto pal = test_palette();
    for (int i = 0; i < 5000; ++i) {
        const Rgba c{static_cast<std::uint8_t>(rng.uniform_int(0, 255)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                     static_cast<std::uint8_t>(rng.uniform_int(0, 255)), 255};
        std::vector<std::pair<long, std::size_t>> ranked;
        for (std::size_t k = 0; k < pal.size(); ++k) {
            const long dr = c.r - pal[k].r, dg = c.g - pal[k].g, db = c.b - pal[k].b;
            ranked.emplace_back(dr * dr + dg * dg + db * db, k);
        }
        std::sort(ranked.begin(), ranked.end());
        ASSERT_EQ(nearest_palette_index(c, pal), ranked.front().second);
    }
}

TEST(Palette, TiesGoToEarliestIndex) {
    const std::vector<Rgba> pal{{10, 0, 0, 255}, {30, 0, 0, 255}};
    EXPECT_EQ(nearest_palette_index({20, 0, 0, 255}, pal), 0u);
}

// ------------------------------ Unify ------------------------------

TEST(UnifySprite, TwoTileAssetAtSixteenPixelsIsThirtyTwoSquare) {
    Rng rng(1);
    const auto out = unify_sprite(random_sprite(rng, 64, 64), 2, 16, test_palette());
    EXPECT_EQ(out.width, 32);
    EXPECT_EQ(out.height, 32);
}

TEST(UnifySprite, OutputUsesPaletteAndBinaryAlphaAndIsIdempotent) {
    Rng rng(2);
    const auto pal = test_palette();
    for (int trial = 0; trial < 40; ++trial) {
        const int w = static_cast<int>(rng.uniform_int(1, 90));
        const int h = static_cast<int>(rng.uniform_int(1, 90));
        const int tiles = static_cast<int>(rng.uniform_int(1, 4));
        const auto once = unify_sprite(random_sprite(rng, w, h), tiles, 16, pal);
        ASSERT_EQ(once.width, tiles * 16);
        ASSERT_EQ(once.height, tiles * 16);
        for (const auto& p : once.pixels) {
            if (p.a == 0) {
                ASSERT_EQ(p, kTransparent);
            } else {
                ASSERT_EQ(p.a, 255);
                ASSERT_NE(std::find(pal.begin(), pal.end(), p), pal.end());
            }
        }
        ASSERT_EQ(unify_sprite(once, tiles, 16, pal), once);
    }
}

TEST(UnifySprite, KeepsAspectWithLetterbox) {
    Sprite tall(10, 40, {255, 255, 255, 255});
    const auto out = unify_sprite(tall, 2, 16, test_palette());
    // 32 px tall, 8 px wide, centred: columns 12..19 opaque
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) EXPECT_EQ(out.at(x, y).a == 255, x >= 12 && x < 20) << x << "," << y;
}

TEST(UnifySprite, EmptyPaletteRejected) {
    try {
        unify_sprite(Sprite(4, 4), 1, 16, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyPalette);
    }
}

// ------------------------------ Background removal ------------------------------

namespace {

// Vertical gradient drifting 2 levels per row around a solid red square.
Sprite gradient_fixture(int n = 48) {
    Sprite s(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            s.at(x, y) = {static_cast<std::uint8_t>(60 + 2 * y), static_cast<std::uint8_t>(120 + y),
                          static_cast<std::uint8_t>(220 - 2 * y), 255};
    for (int y = n / 3; y < 2 * n / 3; ++y)
        for (int x = n / 3; x < 2 * n / 3; ++x) s.at(x, y) = {230, 20, 20, 255};
    return s;
}

}  // namespace

TEST(RemoveBackground, StripsGradientBackgroundAndKeepsSubject) {
    const auto in = gradient_fixture();
    const auto out = remove_background(in);
    std::size_t bg_left = 0;
    std::size_t subject_lost = 0;
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            const bool subject = x >= 16 && x < 32 && y >= 16 && y < 32;
            if (subject && out.at(x, y) != in.at(x, y)) ++subject_lost;
            if (!subject && out.at(x, y).a != 0) ++bg_left;
        }
    EXPECT_EQ(bg_left, 0u);
    EXPECT_EQ(subject_lost, 0u);
}

TEST(RemoveBackground, FullCanvasSubjectIsUntouched) {
    Sprite solid(20, 20, {90, 90, 90, 255});
    EXPECT_EQ(remove_background(solid), solid);

    Sprite checker(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x)
            checker.at(x, y) = (x + y) % 2 ? Rgba{250, 250, 250, 255} : Rgba{10, 10, 10, 255};
    EXPECT_EQ(remove_background(checker), checker);
}

TEST(RemoveBackground, AlreadyTransparentBackgroundIsNoOp) {
    Sprite s(16, 16);
    for (int y = 4; y < 12; ++y)
        for (int x = 4; x < 12; ++x) s.at(x, y) = {1, 2, 3, 255};
    EXPECT_EQ(remove_background(s), s);
}

TEST(RemoveBackground, Idempotent) {
    const auto once = remove_background(gradient_fixture());
    EXPECT_EQ(remove_background(once), once);
}

// ------------------------------ Retrieval ------------------------------

TEST(RetrieveAsset, MatchesBruteForceOver200Entries) {
    oracle::HashEmbedder emb;
    Rng rng(11);
    std::vector<ManifestInput> inputs;
    for (int i = 0; i < 200; ++i)
        inputs.push_back({"asset-" + std::to_string(1000 + i), "builtin:x", random_phrase(rng), {}, 1});
    const auto lib = build_manifest(inputs, emb);
    for (int q = 0; q < 300; ++q) {
        const auto query = random_phrase(rng);
        const auto qv = emb.embed(query);
        std::vector<std::pair<double, std::string>> ranked;
        for (const auto& e : lib.entries) ranked.emplace_back(-oracle::cosine(qv, e.embedding), e.asset_id);
        std::sort(ranked.begin(), ranked.end());
        ASSERT_EQ(retrieve_asset(query, lib, emb), ranked.front().second) << query;
    }
}

TEST(RetrieveAsset, ExactDescriptionWinsAndTiesUseSmallestId) {
    oracle::HashEmbedder emb;
    const auto lib = build_manifest({{"b", "builtin:b", "oak tree", {}, 2},
                                     {"a", "builtin:a", "oak tree", {}, 2},
                                     {"c", "builtin:c", "stone bench", {}, 1}},
                                    emb);
    EXPECT_EQ(retrieve_asset("oak tree", lib, emb), "a");
    EXPECT_EQ(retrieve_asset("stone bench", lib, emb), "c");
}

TEST(RetrieveAsset, EmptyLibrary) {
    oracle::HashEmbedder emb;
    try {
        retrieve_asset("x", AssetLibrary{}, emb);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyLibrary);
    }
}

// ------------------------------ Size estimation ------------------------------

TEST(EstimateSize, ClampsAndFallsBack) {
    oracle::ScriptTable table;
    table.set("estimate_size", {{"description", "giant glass tree"}, {"function_tag", "tree"}}, "9999");
    table.set("estimate_size", {{"description", "speck"}, {"function_tag", "tree"}}, "0");
    table.set("estimate_size", {{"description", "garbled"}, {"function_tag", "tree"}}, "big-ish");
    table.set("estimate_size", {{"description", "apple tree"}, {"function_tag", "tree"}}, "2.4");
    oracle::ScriptedOracle backend(table);
    oracle::HashEmbedder emb;
    oracle::Gateway gw(backend, emb);
    EXPECT_EQ(estimate_size("giant glass tree", "tree", gw), 64);
    EXPECT_EQ(estimate_size("speck", "tree", gw), 1);
    EXPECT_EQ(estimate_size("garbled", "tree", gw), 2);  // schema violation -> tag default
    EXPECT_EQ(estimate_size("apple tree", "tree", gw), 2);
    EXPECT_EQ(estimate_size("unscripted", "civic", gw), 6);
    EXPECT_THROW(estimate_size("  ", "tree", gw), Error);
}

// ------------------------------ Manifest ------------------------------

TEST(AssetLibrary, ManifestRoundTripAndValidation) {
    oracle::HashEmbedder emb;
    const auto lib = builtin_library(emb);
    EXPECT_NO_THROW(lib.validate());
    const json j = lib;
    EXPECT_EQ(json::parse(j.dump()).get<AssetLibrary>(), lib);

    json bad = j;
    bad["manifest_version"] = 2;
    EXPECT_THROW(bad.get<AssetLibrary>(), Error);

    auto dup = lib;
    dup.entries.push_back(dup.entries.front());
    EXPECT_THROW(dup.validate(), Error);

    auto missing = lib;
    missing.entries.front().image_path = "no/such/file.png";
    try {
        missing.validate(std::filesystem::temp_directory_path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IoError);
    }
}
