#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("serrin_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(SERRIN_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

// every file but the wall-clock timings must match byte for byte
void check_same_tree(const fs::path& a, const fs::path& b) {
    std::set<std::string> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.insert(fs::relative(e.path(), a).string());
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.insert(fs::relative(e.path(), b).string());
    CHECK(fa == fb);
    CHECK_FALSE(fa.empty());
    for (const auto& f : fa) {
        if (f == "timings.json") continue;
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

const char* kAniso = R"({"k": 3, "A": [1.1, 1.0, 0.9090909090909091], "c": -1.0, "R": [5.0],
    "grid": {"n_r": 20, "n_theta": 6, "n_phi": 12, "max_first_spacing": 0.05}})";

const char* kLegendre = R"({"radial": {"r0": 1.3}, "legendre": {"source_r_in": 1.3, "source_r_out": 2.6,
    "source_n_r": 66, "target_r_in": 1.0, "target_r_out": 2.0, "target_n_r": 51, "n_theta": 4, "n_phi": 8}})";

}  // namespace

TEST_CASE("two identical runs give identical outputs") {
    TempDir tmp;
    write(tmp.path / "an.json", kAniso);
    write(tmp.path / "leg.json", kLegendre);
    write(tmp.path / "rad.json", R"({"k": 2, "radial": {"r0": 1.3, "rmax": 20, "npts": 101, "spacing": "geometric"}})");
    const std::vector<std::pair<std::string, std::string>> cases{
        {"constants", ""}, {"radial", "rad.json"}, {"solve", "an.json"}, {"legendre", "leg.json"}};
    for (const auto& [cmd, cfg] : cases) {
        INFO(cmd);
        const std::string c = cfg.empty() ? "" : "-c " + (tmp.path / cfg).string() + " ";
        for (const char* tag : {"1", "2"})
            CHECK(run(c + "-o " + (tmp.path / (cmd + tag)).string() + " " + cmd, tmp.path / (cmd + tag + ".log")) == 0);
        check_same_tree(tmp.path / (cmd + "1"), tmp.path / (cmd + "2"));
    }
}

TEST_CASE("verify on the final checkpoint reproduces the solve verification") {
    TempDir tmp;
    write(tmp.path / "an.json", kAniso);
    const auto cfg = (tmp.path / "an.json").string();
    REQUIRE(run("-c " + cfg + " -o " + (tmp.path / "s").string() + " solve", tmp.path / "s.log") == 0);
    REQUIRE(fs::exists(tmp.path / "s" / "field_R0.bin"));
    REQUIRE(run("-c " + cfg + " -o " + (tmp.path / "v").string() + " verify " + (tmp.path / "s" / "field_R0.bin").string(),
                tmp.path / "v.log") == 0);
    for (const char* f : {"identities.json", "decay.json", "boundary.off"}) {
        INFO(f);
        CHECK(slurp(tmp.path / "s" / f) == slurp(tmp.path / "v" / f));
    }
}

TEST_CASE("exit codes") {
    TempDir tmp;
    const auto o = " -o " + (tmp.path / "o").string() + " ";
    auto cfg = [&](const std::string& name, const std::string& text) {
        write(tmp.path / name, text);
        return "-c " + (tmp.path / name).string();
    };
    CHECK(run("--help", tmp.path / "h.log") == 0);
    CHECK(run("", tmp.path / "e.log") == 2);
    CHECK(run("frobnicate", tmp.path / "e.log") == 2);
    CHECK(run("-c /nonexistent.json constants", tmp.path / "e.log") == 2);
    // c above c_bar
    CHECK(run(cfg("c0.json", R"({"c": 0.0, "grid": {"n_r": 12, "n_theta": 4, "n_phi": 8}})") + o + "solve", tmp.path / "e.log") == 2);
    CHECK(run(cfg("bad.json", R"({"foo": 1})") + o + "constants", tmp.path / "e.log") == 2);
    CHECK(slurp(tmp.path / "e.log").find("foo") != std::string::npos);
    CHECK(run(cfg("na.json", R"({"A": [2, 1, 1]})") + o + "solve", tmp.path / "e.log") == 2);
    CHECK(run(cfg("syntax.json", "{\"k\": ") + o + "constants", tmp.path / "e.log") == 2);

    const auto an = cfg("an.json", kAniso);
    REQUIRE(run(an + " -o " + (tmp.path / "s").string() + " solve", tmp.path / "s.log") == 0);
    const auto bin = tmp.path / "s" / "field_R0.bin";
    const auto bytes = slurp(bin);
    std::ofstream(tmp.path / "trunc.bin", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 8));
    CHECK(run(an + o + "verify " + (tmp.path / "trunc.bin").string(), tmp.path / "e.log") == 2);
    CHECK(run(an + o + "verify " + (tmp.path / "missing.bin").string(), tmp.path / "e.log") == 2);
    // same problem on a different angular grid
    const auto other = cfg("other.json", R"({"k": 3, "A": [1.1, 1.0, 0.9090909090909091], "c": -1.0, "R": [5.0],
        "grid": {"n_r": 20, "n_theta": 8, "n_phi": 12, "max_first_spacing": 0.05}})");
    CHECK(run(other + o + "verify " + bin.string(), tmp.path / "e.log") == 2);
    CHECK(slurp(tmp.path / "e.log").find("n_theta") != std::string::npos);
}
