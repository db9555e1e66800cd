#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>
#include <unistd.h>

#include "pgl/error.hpp"
#include "pgl/io.hpp"

using namespace pgl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("pgl_test_io_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("sha256 known digests") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("format_double reads back exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-30.0, 30.0);
    for (int k = 0; k < 2000; ++k) {
        const double v = std::ldexp(U(rng), static_cast<int>(U(rng)));
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(3.0) == "3");
    CHECK(format_double(2.5) == "2.5");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("profile CSV and JSON round trips") {
    const Params params(3.0);
    const Profile pr = solve_shooting(params, default_grid(params, 401));
    const std::string csv = profile_csv(pr, "config {\"p\": 3}");
    CHECK(csv.rfind("# config", 0) == 0);
    const ProfileColumns c = read_profile_csv(csv);
    REQUIRE(c.r.size() == pr.grid.size());
    for (std::size_t i = 0; i < c.r.size(); ++i) {
        CHECK(c.r[i] == pr.grid[i]);
        CHECK(std::abs(c.f[i] - pr.f[i]) <= 1e-15 * std::abs(pr.f[i]));
        CHECK(c.df[i] == pr.df[i]);
        CHECK(c.h[i] == pr.h[i]);
        CHECK(c.grad_norm[i] == pr.gradient_norm[i]);
    }

    const json j = to_json(pr);
    const Profile back = profile_from_json(json::parse(j.dump()));
    CHECK(back.params.p() == pr.params.p());
    CHECK(back.f == pr.f);
    CHECK(back.df == pr.df);
    CHECK(back.h == pr.h);
    CHECK(back.tail == pr.tail);
    CHECK(back.gradient_norm == pr.gradient_norm);
    CHECK(back.f_prime_at_zero == pr.f_prime_at_zero);
    CHECK(back.info.kind == pr.info.kind);
    CHECK(back.info.iterations == pr.info.iterations);
    for (std::size_t i = 0; i < pr.grid.size(); ++i) CHECK(back.grid[i] == pr.grid[i]);
}

TEST_CASE("malformed inputs are rejected") {
    CHECK_THROWS_AS(read_profile_csv("r,f,df\n0,0,0\n"), InvalidArgument);
    CHECK_THROWS_AS(read_profile_csv("r,f,df,h,grad_norm\n0,0,x,1,0\n"), InvalidArgument);
    CHECK_THROWS_AS(read_profile_csv("r,f,df,h,grad_norm\n0,0,1\n"), InvalidArgument);
    CHECK_THROWS_AS(profile_from_json(json::parse("{\"p\": 3}")), InvalidArgument);
}

TEST_CASE("atomic writes") {
    const fs::path d = scratch_dir("atomic");
    const fs::path f = d / "a.txt";
    write_atomic(f, "first");
    CHECK(read_file(f) == "first");
    write_atomic(f, "second, longer");
    CHECK(read_file(f) == "second, longer");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(d)) ++files;
    CHECK(files == 1);
    // missing parents are created
    write_atomic(d / "sub" / "b.txt", "x");
    CHECK(read_file(d / "sub" / "b.txt") == "x");
    // a directory in the way: the rename fails and no temporary is left behind
    fs::create_directories(d / "blocked" / "inner");
    CHECK_THROWS_AS(write_atomic(d / "blocked", "x"), Error);
    std::size_t top = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(d)) ++top;
    CHECK(top == 3);
    CHECK_THROWS(read_file(d / "nope.txt"));
    fs::remove_all(d);
}
