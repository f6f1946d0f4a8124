#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args)
{
    const std::string cmd = std::string(VOXEVO_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    while (const auto n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string value_after(const std::string& text, const std::string& key)
{
    const auto at = text.find(key + " ");
    if (at == std::string::npos) return {};
    const auto start = at + key.size() + 1;
    return text.substr(start, text.find('\n', start) - start);
}

}  // namespace

TEST_SUITE("cli")
{
    TEST_CASE("usage and runtime errors have distinct exit codes")
    {
        CHECK(cli("").code == 1);
        CHECK(cli("frobnicate").code == 1);
        const auto bad_algo = cli("evolve --algo bogus --bench 1 --seed 1");
        CHECK(bad_algo.code == 1);
        CHECK(bad_algo.out.find("neat") != std::string::npos);
        CHECK(cli("evolve --algo neat --bench 1").code == 1);  // seed is mandatory
        CHECK(cli("simulate --morph /nonexistent/shape.vox --out /tmp/x.csv").code == 1);
        const auto bad = fs::temp_directory_path() / ("voxevo_cli_bad_" + std::to_string(::getpid()) + ".vox");
        { std::ofstream(bad) << "dims 2 1 1\n11\n"; }
        const auto invalid = cli("simulate --morph " + bad.string() + " --controller " + bad.string() + " --out /tmp/x.csv");
        fs::remove(bad);
        CHECK(invalid.code == 2);
        CHECK(invalid.out.rfind("error: ", 0) == 0);
    }

    TEST_CASE("simulate then report agree on the displacement")
    {
        const auto dir = fs::temp_directory_path() / ("voxevo_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        const auto ev = cli("evolve --algo neat --bench 1 --gens 2 --pop 4 --seed 5 --out " + (dir / "run").string());
        REQUIRE(ev.code == 0);
        CHECK(fs::exists(dir / "run" / "trial_0.csv"));
        const auto champ = cli("report " + (dir / "run" / "champion_0.genome").string());
        CHECK(champ.code == 0);
        CHECK(value_after(champ.out, "kind") == "neat_cppn");
        CHECK_FALSE(value_after(champ.out, "connections").empty());

        const auto trace = (dir / "trace.csv").string();
        const auto sim = cli("simulate --bench 3 --controller " + (dir / "run" / "champion_0.genome").string() + " --out " + trace);
        REQUIRE(sim.code == 0);
        const auto rep = cli("report " + trace);
        REQUIRE(rep.code == 0);
        CHECK_FALSE(value_after(sim.out, "displacement").empty());
        CHECK(value_after(rep.out, "displacement") == value_after(sim.out, "displacement"));
        CHECK(std::stoi(value_after(rep.out, "samples")) > 10);
        fs::remove_all(dir);
    }
}
