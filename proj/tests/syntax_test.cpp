#include <doctest.h>

#include "qorpilot/syntax/syntax.hpp"

using namespace qorpilot::syntax;

namespace {

// Collects all nodes of a kind, depth-first.
std::vector<const SyntaxNode*> find_kind(const SyntaxNode& root, std::string_view kind) {
    std::vector<const SyntaxNode*> out;
    visit(root, [&](const SyntaxNode& n) {
        if (n.kind == kind) out.push_back(&n);
    });
    return out;
}

}  // namespace

TEST_CASE("cpp: single function definition spans the full text") {
    std::string src = "int f(){return 0;}";
    auto tree = parse_source(src, Language::Cpp);
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 1);
    CHECK(fns[0]->name == "f");
    CHECK(fns[0]->span.start == 0);
    CHECK(fns[0]->span.end == src.size());
}

TEST_CASE("empty tcl input gives empty root") {
    auto tree = parse_source("", Language::Tcl);
    CHECK(tree.root.kind == "source_file");
    CHECK(tree.root.children.empty());
}

TEST_CASE("tcl proc is recognized") {
    std::string src = "proc gp_opt {} {\n  puts hi\n}\n";
    auto tree = parse_source(src, Language::Tcl);
    auto procs = find_kind(tree.root, "procedure");
    REQUIRE(procs.size() == 1);
    CHECK(procs[0]->name == "gp_opt");
    auto cmds = find_kind(tree.root, "command");
    REQUIRE(cmds.size() == 1);
    CHECK(cmds[0]->name == "puts");
}

TEST_CASE("unsupported language and undecodable bytes") {
    CHECK_THROWS_AS(parse_source("x", Language::Other), UnsupportedLanguage);
    std::string bad = "ab\xff\xfe";
    CHECK_THROWS_AS(parse_source(bad, Language::Cpp), UndecodableBytes);
}

TEST_CASE("cpp: namespace qualification and calls") {
    std::string src =
        "namespace dpl {\n"
        "int helper(int x) { return x; }\n"
        "int run(int k) { return helper(k) + helper(k+1); }\n"
        "}\n";
    auto tree = parse_source(src, Language::Cpp);
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 2);
    CHECK(fns[0]->name == "dpl::helper");
    CHECK(fns[1]->name == "dpl::run");
    auto calls = find_kind(*fns[1], "call_expression");
    REQUIRE(calls.size() == 2);
    CHECK(calls[0]->name == "helper");
    REQUIRE(calls[0]->args.size() == 1);
    CHECK(calls[0]->args[0] == "k");
}

TEST_CASE("cpp: class methods, prototypes and includes") {
    std::string src =
        "#include \"util.h\"\n"
        "#include <vector>\n"
        "int util_fn(int a, int b);\n"
        "class Opt {\n"
        " public:\n"
        "  int step(int n) { return util_fn(n, 1); }\n"
        "};\n";
    auto tree = parse_source(src, Language::Cpp);
    auto incs = find_kind(tree.root, "preproc_include");
    REQUIRE(incs.size() == 2);
    CHECK(incs[0]->detail == "util.h");
    CHECK(incs[1]->detail == "vector");
    auto protos = find_kind(tree.root, "function_declaration");
    REQUIRE(protos.size() == 1);
    CHECK(protos[0]->name == "util_fn");
    auto classes = find_kind(tree.root, "class_specifier");
    REQUIRE(classes.size() == 1);
    CHECK(classes[0]->name == "Opt");
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 1);
    CHECK(fns[0]->name == "Opt::step");
}

TEST_CASE("cpp: out-of-class definition keeps its written qualifier") {
    std::string src = "void Opt::run() { helper(); }\n";
    auto tree = parse_source(src, Language::Cpp);
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 1);
    CHECK(fns[0]->name == "Opt::run");
}

TEST_CASE("cpp: constructor initializer list is not misread") {
    std::string src = "Foo::Foo() : count_(0), name_(\"x\") { init(); }\n";
    auto tree = parse_source(src, Language::Cpp);
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 1);
    CHECK(fns[0]->name == "Foo::Foo");
}

TEST_CASE("cpp: unbalanced brace yields ERROR subtree not failure") {
    std::string src = "int f() { if (x) {\n";  // truncated
    auto tree = parse_source(src, Language::Cpp);
    auto errs = find_kind(tree.root, "ERROR");
    CHECK(errs.size() >= 1);
}

TEST_CASE("cpp: default parameters kept in signature text") {
    std::string src = "int tune(int k = 8, double w = 0.5) { return k; }\n";
    auto tree = parse_source(src, Language::Cpp);
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 1);
    CHECK(fns[0]->detail == "int tune(int k = 8, double w = 0.5)");
}

TEST_CASE("cpp: file-scope variable declarations") {
    std::string src = "static int max_iters = 40;\nint f() { return max_iters; }\n";
    auto tree = parse_source(src, Language::Cpp);
    auto vars = find_kind(tree.root, "variable_declaration");
    REQUIRE(vars.size() == 1);
    CHECK(vars[0]->name == "max_iters");
}

TEST_CASE("tcl: registration-style command with args") {
    std::string src = "register_cmd \"detailed_place\" dpMain\ndetailed_place -max_disp 5\n";
    auto tree = parse_source(src, Language::Tcl);
    auto cmds = find_kind(tree.root, "command");
    REQUIRE(cmds.size() == 2);
    CHECK(cmds[0]->name == "register_cmd");
    REQUIRE(cmds[0]->args.size() == 2);
    CHECK(cmds[0]->args[0] == "\"detailed_place\"");
    CHECK(cmds[0]->args[1] == "dpMain");
    CHECK(cmds[1]->name == "detailed_place");
}

TEST_CASE("tcl: namespace eval prefixes procs; control bodies are scanned") {
    std::string src =
        "namespace eval gp {\n"
        "proc opt {args} {\n"
        "  if {$x > 0} {\n"
        "    run_pass -fast\n"
        "  }\n"
        "}\n"
        "}\n";
    auto tree = parse_source(src, Language::Tcl);
    auto procs = find_kind(tree.root, "procedure");
    REQUIRE(procs.size() == 1);
    CHECK(procs[0]->name == "gp::opt");
    auto cmds = find_kind(*procs[0], "command");
    bool found = false;
    for (auto* c : cmds)
        if (c->name == "run_pass") found = true;
    CHECK(found);
}

TEST_CASE("tcl: set and source") {
    std::string src = "set max_disp 64\nsource helpers.tcl\n";
    auto tree = parse_source(src, Language::Tcl);
    auto sets = find_kind(tree.root, "variable_assignment");
    REQUIRE(sets.size() == 1);
    CHECK(sets[0]->name == "max_disp");
    CHECK(sets[0]->detail == "64");
    auto imports = find_kind(tree.root, "import_statement");
    REQUIRE(imports.size() == 1);
    CHECK(imports[0]->detail == "helpers.tcl");
}

TEST_CASE("python: defs, classes, imports, calls") {
    std::string src =
        "import os\n"
        "from util.paths import norm\n"
        "\n"
        "class Runner:\n"
        "    def go(self, n):\n"
        "        return norm(n)\n"
        "\n"
        "def main():\n"
        "    r = Runner()\n"
        "    r.go(3)\n";
    auto tree = parse_source(src, Language::Python);
    auto imports = find_kind(tree.root, "import_statement");
    REQUIRE(imports.size() == 2);
    CHECK(imports[0]->detail == "os");
    CHECK(imports[1]->detail == "util.paths");
    auto classes = find_kind(tree.root, "class_definition");
    REQUIRE(classes.size() == 1);
    CHECK(classes[0]->name == "Runner");
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 2);
    CHECK(fns[0]->name == "Runner.go");
    CHECK(fns[1]->name == "main");
    auto calls = find_kind(*fns[1], "call_expression");
    REQUIRE(calls.size() == 2);
    CHECK(calls[0]->name == "Runner");
    CHECK(calls[1]->name == "r.go");
}

TEST_CASE("python: block spans cover the body") {
    std::string src = "def a():\n    x = 1\n    return x\n\ndef b():\n    pass\n";
    auto tree = parse_source(src, Language::Python);
    auto fns = find_kind(tree.root, "function_definition");
    REQUIRE(fns.size() == 2);
    CHECK(fns[0]->span.start == 0);
    // a() spans through "return x" but not into b()
    CHECK(fns[0]->span.end > src.find("return x"));
    CHECK(fns[0]->span.end <= src.find("def b"));
}

TEST_CASE("verilog: module declarations only") {
    std::string src = "module top(input clk);\nwire w;\nendmodule\nmodule sub();\nendmodule\n";
    auto tree = parse_source(src, Language::Verilog);
    auto mods = find_kind(tree.root, "module_declaration");
    REQUIRE(mods.size() == 2);
    CHECK(mods[0]->name == "top");
    CHECK(mods[1]->name == "sub");
}

TEST_CASE("language detection from path") {
    CHECK(language_for_path("a/b.cpp") == Language::Cpp);
    CHECK(language_for_path("a/b.c") == Language::C);
    CHECK(language_for_path("x.tcl") == Language::Tcl);
    CHECK(language_for_path("x.py") == Language::Python);
    CHECK(language_for_path("x.v") == Language::Verilog);
    CHECK(language_for_path("x.rs") == Language::Other);
    CHECK(language_for_path("Makefile") == Language::Other);
}
