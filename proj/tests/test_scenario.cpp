#include <catch_amalgamated.hpp>

#include "torlift/commands.hpp"
#include "torlift/cylinder.hpp"
#include "torlift/scenario.hpp"

using namespace torlift;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* kMinimal = R"([scenario]
version = 1
rank = 2
torus_order = 4

[nerve]
vertices = U
)";

std::string triangle(const std::string& gac) {
  return std::string(R"([scenario]
version = 1
name = tri
rank = 2
torus_order = 4
good_cover = true

[nerve]
vertices = A B C
edge = A B
edge = B C
edge = A C
triangle = A B C

[cocycle]
g A B = [[0,1],[1,0]]
g B C = [[1,0],[-1,1]]
g A C = )") + gac + "\n";
}

std::string parse_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal scenario", "[scenario]") {
  auto s = parse_scenario(kMinimal);
  CHECK(s.nerve.vertices().size() == 1);
  CHECK(s.nerve.edges().empty());
  CHECK(s.rank == 2);
  CHECK(s.fiber_order == 4);
  CHECK_FALSE(s.lifting.has_value());
  CHECK(parse_scenario(emit_scenario(s)).nerve.vertices() == s.nerve.vertices());
}

TEST_CASE("parse errors carry the line and the rule", "[scenario]") {
  CHECK_THAT(parse_error(triangle("[[1,1],[2,2]]")), ContainsSubstring("line 18") && ContainsSubstring("unimodular"));
  CHECK_THAT(parse_error(std::string(kMinimal) + "colour = red\n"), ContainsSubstring("unknown key 'colour'"));
  CHECK_THAT(parse_error(std::string(kMinimal) + "[bogus]\n"), ContainsSubstring("unknown section"));
  CHECK_THAT(parse_error("[nerve]\nvertices = U\n[scenario]\nversion = 1\n"), ContainsSubstring("[scenario]"));
  CHECK_THAT(parse_error(std::string(kMinimal) + "[representation]\ngroup = trivial\n[cocycle]\n"),
             ContainsSubstring("out of order"));
  CHECK_THAT(parse_error("[scenario]\nversion = 2\nrank = 1\ntorus_order = 2\n"), ContainsSubstring("version"));
  CHECK_THAT(parse_error("[scenario]\nversion = 1\nrank = 2\n[nerve]\nvertices = U\n"),
             ContainsSubstring("torus_order"));
  CHECK_THAT(parse_error("[scenario]\nversion = 1\nversion = 1\n"), ContainsSubstring("line 3"));
  CHECK_THAT(parse_error(triangle("[[1,0],[0,1],[0,0]]")), ContainsSubstring("line 18"));
  auto missing = triangle("[[0,1],[1,0]]");
  missing = missing.substr(0, missing.find("g A C"));
  CHECK_FALSE(parse_error(missing).empty());
}

TEST_CASE("emit is a normal form", "[scenario]") {
  auto text = triangle("[[ 1 , 1 ], [ 1 , 0 ]]  # comment");
  auto once = emit_scenario(parse_scenario(text));
  CHECK(emit_scenario(parse_scenario(once)) == once);
  CHECK_THAT(once, ContainsSubstring("g A C = [[1,1],[1,0]]"));
}

TEST_CASE("commands and exit codes", "[scenario][cli]") {
  auto trivial = parse_scenario(kMinimal);
  auto r = run("global-action", trivial);
  CHECK(r.exit_code == kPass);
  CHECK_THAT(r.report, ContainsSubstring("induced by a global action (at nerve level)"));
  CHECK_THAT(r.report, ContainsSubstring("good_cover: not declared"));

  CHECK(run("check-cocycle", parse_scenario(triangle("[[-1,1],[1,0]]"))).exit_code == kPass);
  auto bad = run("check-cocycle", parse_scenario(triangle("[[0,1],[1,-1]]")));
  CHECK(bad.exit_code == kFailure);
  CHECK_THAT(bad.report, ContainsSubstring("g(A-B) g(B-C) != g(A-C)"));
  CHECK(run("holonomy", parse_scenario(triangle("[[0,1],[1,-1]]"))).exit_code == kInputError);

  RunOptions opt;
  opt.s = Angle(1, 8);
  auto cyl = cylinder_scenario(opt);
  auto ga = run("global-action", cyl);
  CHECK(ga.exit_code == kFailure);
  CHECK_THAT(ga.report, ContainsSubstring("[[1,0],[-1,1]]"));
  CHECK_THAT(ga.report, ContainsSubstring("good_cover: declared"));

  auto ob = run("obstruction", cyl);
  CHECK(ob.exit_code == kPass);
  CHECK_THAT(ob.report, ContainsSubstring("verdict: vanishing-at-scale"));
  CHECK_THAT(ob.report, ContainsSubstring("witness check: passed"));
  CHECK(run("obstruction", cyl).report == ob.report);

  RunOptions w1;
  w1.window = 1;
  auto ind = run("obstruction", cyl, w1);
  CHECK(ind.exit_code == kIndeterminate);
  CHECK(run("check-lifting-data", cyl).exit_code == kPass);
  CHECK(run("no-such-command", cyl).exit_code == kInputError);
}
