#include "voxevo/morphology.hpp"

#include <doctest.h>

#include <string>

using namespace voxevo;

namespace {

std::string solid_doc(int nx, int ny, int nz, char fill)
{
    std::string s = "dims " + std::to_string(nx) + " " + std::to_string(ny) + " " + std::to_string(nz) + "\n";
    for (int z = 0; z < nz; ++z) {
        if (z) s += "\n";
        for (int y = 0; y < ny; ++y) s += std::string(static_cast<std::size_t>(nx), fill) + "\n";
    }
    return s;
}

MorphologyErrc parse_error(const std::string& text)
{
    try {
        parse_morphology(text);
    } catch (const MorphologyError& e) {
        return e.code();
    }
    FAIL("expected a MorphologyError");
    return MorphologyErrc::Syntax;
}

}  // namespace

TEST_SUITE("morphology")
{
    TEST_CASE("single contractile voxel")
    {
        const auto g = parse_morphology("dims 1 1 1\n3\n");
        CHECK(g.dims() == Dims{1, 1, 1});
        CHECK(g.at(0, 0, 0) == Material::Contractile);
    }

    TEST_CASE("beam with contractile core counts 288 active voxels")
    {
        // build the document by hand: passive shell, 18x4x4 contractile core at x 1..18, y 2..5, z 2..5
        std::string s = "dims 20 8 8\n";
        int expected = 0;
        for (int z = 0; z < 8; ++z) {
            if (z) s += "\n";
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 20; ++x) {
                    const bool core = x >= 1 && x <= 18 && y >= 2 && y <= 5 && z >= 2 && z <= 5;
                    expected += core;
                    s += core ? '3' : '1';
                }
                s += '\n';
            }
        }
        const auto g = parse_morphology(s);
        CHECK(expected == 288);
        CHECK(g.count(Material::Contractile) == 288);
        CHECK(g.count(Material::Passive) == 20 * 8 * 8 - 288);
    }

    TEST_CASE("cell mapping follows columns, lines and blocks")
    {
        const auto g = parse_morphology("dims 3 2 2\n# comment\n313\n111\n\n100\n300\n");
        CHECK(g.at(1, 0, 0) == Material::Passive);
        CHECK(g.at(0, 0, 0) == Material::Contractile);
        CHECK(g.at(2, 0, 0) == Material::Contractile);
        CHECK(g.at(0, 1, 1) == Material::Contractile);
        CHECK(g.at(1, 1, 1) == Material::Empty);
    }

    TEST_CASE("parse errors are distinct")
    {
        CHECK(parse_error("dims 2 1 1\n3\n") == MorphologyErrc::DimensionMismatch);
        CHECK(parse_error("dims 2 1 1\n3 0\n") == MorphologyErrc::IllegalCharacter);
        CHECK(parse_error("dims 2 1 1\n32\n") == MorphologyErrc::IllegalCharacter);
        CHECK(parse_error("dims 3 1 1\n301\n") == MorphologyErrc::Disconnected);
        CHECK(parse_error("dims 2 1 1\n03\n") == MorphologyErrc::NoAnchor);
        CHECK(parse_error("dims 2 1 1\n11\n") == MorphologyErrc::NoActiveVoxel);
        CHECK(parse_error("dims 2 1 2\n13\n") == MorphologyErrc::DimensionMismatch);
        CHECK(parse_error("size 1 1 1\n3\n") == MorphologyErrc::Syntax);
    }

    TEST_CASE("disconnected error names the first unreached voxel")
    {
        try {
            parse_morphology("dims 3 1 2\n300\n\n001\n");
            FAIL("expected error");
        } catch (const MorphologyError& e) {
            CHECK(e.code() == MorphologyErrc::Disconnected);
            REQUIRE(e.where());
            CHECK(*e.where() == Coord{2, 0, 1});
            CHECK(std::string(e.what()).find("disconnected-morphology") != std::string::npos);
        }
    }

    TEST_CASE("render and parse round trip")
    {
        for (int k = 1; k <= 9; ++k) {
            const auto g = generate_benchmark(k, 42);
            CHECK(parse_morphology(render_morphology(g), g.id()) == g);
        }
        const auto small = parse_morphology(solid_doc(2, 3, 2, '3'));
        CHECK(parse_morphology(render_morphology(small)) == small);
    }

    TEST_CASE("benchmark generator")
    {
        CHECK(render_morphology(generate_benchmark(1, 42)) == render_morphology(generate_benchmark(1, 42)));
        CHECK(generate_benchmark(1, 42).cells() != generate_benchmark(2, 42).cells());
        for (int k = 1; k <= 9; ++k) {
            for (std::uint64_t seed : {1ull, 42ull, 999ull}) {
                const auto g = generate_benchmark(k, seed);
                CHECK(g.dims() == kBenchmarkDims);
                CHECK_NOTHROW(validate_morphology(g));
                CHECK(g.count(Material::Contractile) >= 1);
                // passive lateral enclosure
                for (int x = 0; x < 20; ++x)
                    for (int i = 0; i < 8; ++i) {
                        CHECK(g.at(x, 0, i) == Material::Passive);
                        CHECK(g.at(x, 7, i) == Material::Passive);
                        CHECK(g.at(x, i, 0) == Material::Passive);
                        CHECK(g.at(x, i, 7) == Material::Passive);
                    }
            }
        }
        // all nine interiors differ pairwise
        for (int a = 1; a <= 9; ++a)
            for (int b = a + 1; b <= 9; ++b) CHECK(generate_benchmark(a, 42).cells() != generate_benchmark(b, 42).cells());
        CHECK_THROWS_AS(generate_benchmark(0, 42), MorphologyError);
        CHECK_THROWS_AS(generate_benchmark(10, 42), MorphologyError);
        CHECK(benchmark_id(3) == "bha-3");
        CHECK(benchmark_id(3, 7) == "bha-3:7");
    }

    TEST_CASE("material inputs normalize each axis")
    {
        auto g = VoxelGrid(kBenchmarkDims, Material::Passive).with(19, 7, 7, Material::Contractile);
        auto a = material_inputs(g, 0, 0, 0);
        CHECK(a.xn == -1.0);
        CHECK(a.yn == -1.0);
        CHECK(a.zn == -1.0);
        CHECK(a.m == 1.0);
        auto b = material_inputs(g, 19, 7, 7);
        CHECK(b.xn == 1.0);
        CHECK(b.yn == 1.0);
        CHECK(b.zn == 1.0);
        CHECK(b.m == 3.0);
        CHECK(material_inputs(g, 9, 3, 3).xn == doctest::Approx(-0.0526315789).epsilon(1e-9));
        const auto line = VoxelGrid(Dims{3, 1, 1}, Material::Contractile);
        CHECK(material_inputs(line, 1, 0, 0).yn == 0.0);
        CHECK(material_inputs(line, 1, 0, 0).xn == 0.0);
        CHECK_THROWS_AS(material_inputs(g, 20, 0, 0), MorphologyError);
    }

    TEST_CASE("mirror and hash")
    {
        const auto g = generate_benchmark(5, 42);
        CHECK(mirror_y(mirror_y(g)) == g);
        CHECK(mirror_y(g).at(3, 1, 4) == g.at(3, 6, 4));
        CHECK(morphology_hash(g) == morphology_hash(parse_morphology(render_morphology(g))));
        CHECK(morphology_hash(g) != morphology_hash(generate_benchmark(6, 42)));
    }
}
