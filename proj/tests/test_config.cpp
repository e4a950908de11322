#include "doctest.h"

#include "dwlab/config.hpp"
#include "dwlab/errors.hpp"

using namespace dwlab;

TEST_CASE("parsing and blocks") {
    const auto c = Config::parse("# comment\nn = 10\n[experiment]\nz_grid = 2i, 1+1i, -1+0.5i\nseed = 42\n");
    CHECK(c.get_int("n") == 10);
    CHECK(c.get_int("experiment.seed") == 42);
    const auto z = c.block("experiment").get_complexes("z_grid");
    REQUIRE(z.size() == 3);
    CHECK(z[0] == cplx(0, 2));
    CHECK(z[2] == cplx(-1, 0.5));
    CHECK_THROWS_AS(c.get_string("missing"), ConfigError);
    CHECK_THROWS_AS(Config::parse("oops"), ConfigError);
}

TEST_CASE("complex literals round trip") {
    for (cplx z : {cplx(0, 2), cplx(-1, 0.5), cplx(3, 0), cplx(0.1, -0.25)})
        CHECK(parse_complex(format_complex(z)) == z);
}

TEST_CASE("digest is stable under key order") {
    const auto a = Config::parse("x = 1\ny = 2\n"), b = Config::parse("y = 2\nx = 1\n");
    CHECK(a.digest() == b.digest());
    CHECK(a.to_text() == b.to_text());
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
}
