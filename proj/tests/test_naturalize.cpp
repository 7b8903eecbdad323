#include "doctest.h"

#include <random>

#include "clnx/error.hpp"
#include "clnx/naturalize.hpp"
#include "clnx/pipeline.hpp"
#include "support.hpp"

using namespace clnx;

namespace {

std::string render(std::string_view text, const RuleSet& rules = default_rules()) {
  std::string out = apply_rules(text, rules).text;
  if (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

}  // namespace

TEST_CASE("key symbol table, one minimal input per row") {
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"*p", "dereference p"},
      {"&var", "obtain address of var"},
      {"a | b", "a Bitwise OR b"},
      {"a ^ b", "a Bitwise XOR b"},
      {"~a", "Bitwise NOT of a"},
      {"a & b", "a Bitwise AND b"},
      {"a << b", "a left shift by b"},
      {"a >> b", "a right shift by b"},
      {"malloc(size)", "allocate memory of size"},
      {"free(ptr)", "deallocate memory of ptr"},
      {"pthread_create(t)", "create new thread t"},
      {"write(data)", "write data to file descriptor"},
      {"goto label", "jump to the statement label"},
      {"setjmp(env)", "save the current environment env"},
      {"#include <h>", "include header file <h>"},
      {"#elif condition", "else if condition"},
      {"struct P{}", "declare a structure P{}"},
      {"template<T>", "template class definition <T>"},
      {"volatile int s", "declare volatile variable s"},
  };
  for (const auto& [in, want] : rows) CHECK_MESSAGE(render(in) == want, in);
}

TEST_CASE("worked examples") {
  CHECK(render("*mutexfile = ap_runtime_dir_relative(pool, file);") ==
        "dereference mutexfile = ap_runtime_dir_relative(pool, file);");
  CHECK(render("x = a * b;") == "x = a * b;");
  CHECK(render("free(ptr);") == "deallocate memory of ptr;");
  CHECK(render("longjmp(env, 1)") == "restore the environment env with value 1");
  CHECK(render("T *p;") == "declare p as pointer to T;");
}

TEST_CASE("context decides between unary and binary readings") {
  CHECK(render("x = *p & mask;") == "x = dereference p Bitwise AND mask;");
  CHECK(render("f(&a, b & c);") == "f(obtain address of a, b Bitwise AND c);");
  CHECK(render("if (x) *q = 0;") == "if (x) dereference q = 0;");
  CHECK(render("y = (a) * b;") == "y = (a) * b;");
  CHECK(render("return ~v;") == "return Bitwise NOT of v;");
  CHECK(render("n = a[i] << 2;") == "n = a[i] left shift by 2;");
  CHECK(render("obj.free(p);") == "obj.free(p);");
  CHECK(render("p = malloc(n * 2);") == "p = allocate memory of n * 2;");
}

TEST_CASE("nested matches are rewritten inside captures") {
  CHECK(render("free(*pp);") == "deallocate memory of dereference pp;");
  CHECK(render("m = malloc(a << 2);") == "m = allocate memory of a left shift by 2;");
}

TEST_CASE("rule counts per category") {
  const NaturalizedOutput out = apply_rules("#include <h>\np = malloc(a | b);\n");
  CHECK(out.rules_applied[static_cast<std::size_t>(RuleCategory::PreprocessorDirective)] == 1);
  CHECK(out.rules_applied[static_cast<std::size_t>(RuleCategory::ApiCall)] == 1);
  CHECK(out.rules_applied[static_cast<std::size_t>(RuleCategory::Operator)] == 1);
  CHECK(out.total_rules_applied() == 3);
}

TEST_CASE("literals and comments are opaque") {
  CHECK(render("s = \"*p & q\";") == "s = \"*p & q\";");
  CHECK(render("c = '&';") == "c = '&';");
  CHECK(render("x = a; // free(ptr) and *p") == "x = a; // free(ptr) and *p");
  CHECK(render("/* a * b */ y = 1;") == "/* a * b */ y = 1;");
  // a comment between the parts of a pattern blocks the match
  CHECK(render("free /* no */ (p);") == "free /* no */ (p);");
}

TEST_CASE("literal opacity fuzz") {
  const std::vector<std::string> patterns = {"*p", "&v", "a | b", "a ^ b", "~a", "a & b", "a << b",
                                             "a >> b", "malloc(n)", "free(q)", "goto l", "setjmp(e)",
                                             "struct S{}", "volatile int v"};
  std::mt19937 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, patterns.size() - 1);
  std::uniform_int_distribution<int> wrap(0, 2);
  for (int round = 0; round < 500; ++round) {
    const std::string& p = patterns[pick(rng)];
    std::string literal;
    switch (wrap(rng)) {
      case 0: literal = "\"" + p + "\""; break;
      case 1: literal = "/* " + p + " */"; break;
      default: literal = "// " + p; break;
    }
    const std::string line = literal.rfind("//", 0) == 0 ? "y = 1; " + literal : "y = " + literal + ";";
    REQUIRE_MESSAGE(render(line).find(literal) != std::string::npos, line);
  }
}

TEST_CASE("output is a fixed point") {
  const std::string src = clnx::testing::slurp(CLNX_TEST_DATA "/util_mutex_excerpt.c");
  const std::string once = apply_rules(src).text;
  CHECK(apply_rules(once).text == once);
}

TEST_CASE("line structure and loop annotation in text form") {
  const NaturalizedOutput out = apply_rules("void f(int *p)\n{\n    loop: while (*p) {\n        p++;\n    }\n}\n");
  CHECK(out.text == "void f(declare p as pointer to int)\n{\nloop structure: while (dereference p) {\np++;\n}\n}\n");
  CHECK(out.original_line_count == 6);
  CHECK(out.naturalized_chars == out.text.size());
}

TEST_CASE("custom rule documents") {
  const std::string extend = R"j({"mode": "extend", "rules": [
      {"name": "strcpy", "category": "ApiCall", "pattern": "strcpy ( $dst:arg , $src:arg )",
       "template": "copy string {src} into {dst}", "guard": "call_position"}]})j";
  const RuleSet ext = parse_rule_document(extend);
  CHECK(ext.size() == default_rules().size() + 1);
  CHECK(render("strcpy(a, b); free(a);", ext) == "copy string b into a; deallocate memory of a;");

  const std::string replace = R"j({"mode": "replace", "rules": [
      {"category": "Operator", "pattern": "* $ptr:operand", "template": "deref {ptr}", "guard": "unary_position"}]})j";
  const RuleSet rep = parse_rule_document(replace);
  CHECK(rep.size() == 1);
  CHECK(render("*p = free(q);", rep) == "deref p = free(q);");

  auto rejects = [](const std::string& doc) {
    try {
      parse_rule_document(doc);
    } catch (const Error& e) {
      return e.code() == ErrorCode::RuleParse;
    }
    return false;
  };
  CHECK(rejects("not json"));
  CHECK(rejects(R"j({"mode": "merge", "rules": []})j"));
  CHECK(rejects(R"j({"rules": [{"category": "nope", "pattern": "x", "template": "y"}]})j"));
  CHECK(rejects(R"j({"rules": [{"category": "Operator", "pattern": "x", "template": "{missing}"}]})j"));
  CHECK(rejects(R"j({"rules": [{"category": "Operator", "pattern": "$a:bogus", "template": "{a}"}]})j"));
  CHECK(rejects(R"j({"rules": [{"category": "Operator", "pattern": "x", "template": "y", "guard": "sideways"}]})j"));
  CHECK_THROWS_AS(load_rule_file("/nonexistent/rules.json"), Error);
}

TEST_CASE("the built-in set covers every tabled symbol") {
  int tabled = 0;
  for (const TransformRule& r : default_rules()) tabled += r.core;
  CHECK(tabled == 19);
}

TEST_CASE("pipeline modes") {
  const std::string src =
      "int f(int *p, int a)\n{\n    int r = 0;\n    if (a) {\n        r = *p << 2;\n        r = r | 1;\n"
      "        r = r ^ 3;\n    } else {\n        r = a;\n    }\n    return r;\n}\n";
  // taint the long branch
  const std::string diff = "@@ -5 +5 @@\n-        r = *p;\n+        r = *p << 2;\n";
  PipelineOptions opts;
  opts.func_start_line = 1;

  opts.structural_only = true;
  const PipelineResult s = naturalize_record(src, diff, opts);
  CHECK(s.output.text.find("*p << 2") != std::string::npos);
  CHECK(s.output.text.find("r = a;") == std::string::npos);
  CHECK(s.output.total_rules_applied() == 0);
  CHECK(s.tainted_blocks >= 1);

  opts.structural_only = false;
  const PipelineResult full = naturalize_record(src, diff, opts);
  CHECK(full.output.text.find("dereference p left shift by 2") != std::string::npos);
  CHECK(full.output.text.find("r = a;") == std::string::npos);

  opts.token_only = true;
  const PipelineResult tok = naturalize_record(src, diff, opts);
  CHECK(tok.output.text.find("r = a;") != std::string::npos);
  CHECK(tok.output.text.find("declare p as pointer to int") != std::string::npos);

  opts.structural_only = true;
  CHECK_THROWS_AS(naturalize_record(src, diff, opts), std::invalid_argument);
}

TEST_CASE("pipeline flags") {
  const std::string src = "int f(int a)\n{\n    return a;\n}\n";
  CHECK(naturalize_record(src, "").flags == std::vector<std::string>{"no_diff"});

  PipelineOptions opts;
  opts.func_start_line = 1;
  const auto r = naturalize_record(src, "@@ -90 +90 @@\n-x\n+y\n", opts);
  CHECK(std::find(r.flags.begin(), r.flags.end(), "coordinate_mismatch") != r.flags.end());
  CHECK(r.tainted_blocks == 0);

  const auto u = naturalize_record(src, "@@ -90 +90 @@\n-x\n+y\n");
  CHECK(std::find(u.flags.begin(), u.flags.end(), "unanchored") != u.flags.end());
}

TEST_CASE("errors name the failing stage") {
  try {
    naturalize_record("int f() { if (x) { y; }", "");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnbalancedBraces);
    CHECK(e.stage() == "segment");
  }
  try {
    naturalize_record("int f() { return 0; }", "@@ -x +1 @@\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.stage() == "parse_diff");
  }
}
