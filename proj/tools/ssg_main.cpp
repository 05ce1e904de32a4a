// Command-line front end: nucleus computation, property checks, boundary
// word equivalence, gluing-class extraction, Moore/tile diagram export, the
// structure-to-group construction, round-trip verification, and corpus
// verification.
//
// Exit codes: 0 success / all queried properties true; 1 a property is false
// or a verification mismatched; 2 invalid input; 3 unknown (bound exceeded);
// 4 internal error.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssg/analysis.hpp"
#include "ssg/automata.hpp"
#include "ssg/construction.hpp"
#include "ssg/errors.hpp"
#include "ssg/limitspace.hpp"
#include "ssg/nucleus.hpp"
#include "ssg/words.hpp"

namespace {

using namespace ssg;
using nlohmann::ordered_json;

size_t default_bound() {
  if (const char* env = std::getenv("SSG_BOUND")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<size_t>(v);
  }
  return 10000;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_invalid("cannot open " + path + " for writing");
  out << text;
  if (!out) fail_invalid("failed to write " + path);
}

Group load_group(const std::string& path, size_t bound) {
  return realize(load_group_file(path), bound);
}

// ---------------------------------------------------------------------------
// Subcommand bodies

int run_nucleus(const std::string& input, size_t bound, bool dot,
                const std::string& out) {
  Group group = load_group(input, bound);
  ContractionResult result = is_contracting(group, bound);
  if (!result.known) {
    std::cout << "unknown: " << result.reason << "\n";
    return 3;
  }
  if (dot) {
    write_output(out, moore_to_dot(result.nucleus.diagram, "nucleus"));
    return 0;
  }
  std::string text = "nucleus size: " +
                     std::to_string(result.nucleus.elements.size()) + "\n";
  for (const std::string& line : moore_to_lines(result.nucleus.diagram)) {
    text += line + "\n";
  }
  write_output(out, text);
  return 0;
}

int run_check(const std::string& input, size_t bound, bool condition2,
              bool pcf, bool bounded, bool strict, bool all) {
  if (all || (!condition2 && !pcf && !bounded && !strict)) {
    condition2 = pcf = bounded = strict = true;
  }
  Group group = load_group(input, bound);
  Nucleus nucleus = compute_nucleus(group, bound);
  bool ok = true;
  auto report = [&](const char* name, bool value) {
    std::cout << name << ": " << (value ? "true" : "false") << "\n";
    ok = ok && value;
  };
  if (condition2) report("condition2", check_condition2(nucleus));
  if (pcf) report("pcf", check_pcf(nucleus));
  if (bounded) {
    bool value = true;
    for (Element g : group.generators) value = value && is_bounded_element(g);
    report("bounded", value);
  }
  if (strict) report("strictly_pcf", check_strictly_pcf(group, nucleus));
  return ok ? 0 : 1;
}

int run_equiv(const std::string& input, size_t bound, const std::string& lhs,
              const std::string& rhs) {
  Group group = load_group(input, bound);
  Nucleus nucleus = compute_nucleus(group, bound);
  const int k = group.alphabet_size();
  EventuallyPeriodicWord u = parse_word(lhs, k);
  if (rhs.empty()) {
    for (const EventuallyPeriodicWord& w : equivalence_class(nucleus, u)) {
      std::cout << to_string(w) << "\n";
    }
    return 0;
  }
  EventuallyPeriodicWord v = parse_word(rhs, k);
  const bool equal = are_equivalent(nucleus, u, v);
  std::cout << (equal ? "equivalent" : "distinct") << "\n";
  return equal ? 0 : 1;
}

int run_glue(const std::string& input, size_t bound, bool sets,
             const std::string& out) {
  Group group = load_group(input, bound);
  Nucleus nucleus = compute_nucleus(group, bound);
  std::vector<GluingClass> classes = gluing_classes(nucleus);
  if (sets) {
    CriticalSets cp = critical_sets(classes);
    std::string text = "critical (" + std::to_string(cp.critical.size()) +
                       "):\n";
    for (const auto& w : cp.critical) text += to_string(w) + "\n";
    text += "postcritical (" + std::to_string(cp.postcritical.size()) +
            "):\n";
    for (const auto& w : cp.postcritical) text += to_string(w) + "\n";
    write_output(out, text);
    return 0;
  }
  StructureSpec spec{group.alphabet_size(), std::move(classes)};
  write_output(out, structure_to_json(spec));
  return 0;
}

int run_moore(const std::string& input, size_t bound, const std::string& out) {
  Group group = load_group(input, bound);
  std::vector<Element> states;
  for (Element g : group.generators) {
    for (Element s : state_closure(g)) states.push_back(s);
  }
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  sort_elements(states);
  MooreDiagram diagram = build_moore(states, group.name_hints());
  write_output(out, moore_to_dot(diagram, "automaton"));
  return 0;
}

int run_tiles(const std::string& input, size_t bound, int level,
              const std::string& format, const std::string& out) {
  Group group = load_group(input, bound);
  Nucleus nucleus = compute_nucleus(group, bound);
  TileGraph graph = tile_graph(nucleus, level, bound);
  if (format == "json") {
    ordered_json doc;
    doc["level"] = graph.level;
    doc["vertices"] = ordered_json::array();
    for (const FiniteWord& w : graph.vertices) {
      doc["vertices"].push_back(to_string(w));
    }
    doc["edges"] = ordered_json::array();
    for (const auto& [a, b] : graph.edges) {
      doc["edges"].push_back(ordered_json::array({a, b}));
    }
    write_output(out, doc.dump(2) + "\n");
  } else {
    write_output(out, tiles_to_dot(graph));
  }
  return 0;
}

int run_construct(const std::string& input, bool report,
                  const std::string& out) {
  const std::string text = read_file(input);
  ordered_json probe;
  try {
    probe = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    fail_invalid(input + ": " + e.what());
  }
  StructureSpec spec;
  if (probe.is_object() && probe.contains("equations")) {
    spec = normalize_equations(parse_equations_json(text));
  } else {
    spec = parse_structure_json(text);
  }
  SynthesisResult result = synthesize(spec);
  if (report) {
    std::cerr << "generators: " << result.generators_before << " -> "
              << result.group.names.size() << "\n";
    for (const auto& [dropped, kept] : result.identified) {
      std::cerr << "identified: " << dropped << " -> " << kept << "\n";
    }
  }
  write_output(out, group_spec_to_json(result.group));
  return 0;
}

int run_roundtrip(const std::string& input, size_t bound) {
  StructureSpec spec = parse_structure_json(read_file(input));
  RoundtripReport rep = roundtrip_verify(spec, bound);
  std::cout << "generators: " << rep.generators_before << " -> "
            << rep.generators_after << "\n";
  std::cout << "nucleus size: " << rep.nucleus_size << "\n";
  std::cout << "condition2: " << (rep.condition2 ? "true" : "false") << "\n";
  std::cout << "pcf: " << (rep.pcf ? "true" : "false") << "\n";
  std::cout << "input classes: " << rep.input_classes.size() << "\n";
  std::cout << "extracted classes: " << rep.extracted_classes.size() << "\n";
  if (rep.ok) {
    std::cout << "roundtrip: match\n";
    return 0;
  }
  std::cout << "roundtrip: mismatch (" << rep.failure << ")\n";
  return 1;
}

// ---------------------------------------------------------------------------
// Corpus verification

struct EntryState {
  std::optional<Group> group;
  std::optional<ContractionResult> contraction;
  std::optional<std::vector<GluingClass>> classes;
  std::optional<StructureSpec> structure;
  std::optional<SynthesisResult> synthesis;
  std::optional<EquationsSpec> equations;
};

const Nucleus& need_nucleus(EntryState& st, size_t bound) {
  if (!st.contraction) st.contraction = is_contracting(*st.group, bound);
  if (!st.contraction->known) {
    fail_bound("nucleus unknown: " + st.contraction->reason);
  }
  return st.contraction->nucleus;
}

const std::vector<GluingClass>& need_classes(EntryState& st, size_t bound) {
  if (!st.classes) st.classes = gluing_classes(need_nucleus(st, bound));
  return *st.classes;
}

std::string render(const ordered_json& v) { return v.dump(); }

// Computes one expected property for a corpus entry; returns (ok, got).
std::pair<bool, std::string> corpus_check(const std::string& kind,
                                          const std::string& key,
                                          const ordered_json& value,
                                          EntryState& st, size_t bound) {
  auto got_bool = [&](bool b) {
    return std::make_pair(value.is_boolean() && value.get<bool>() == b,
                          std::string(b ? "true" : "false"));
  };
  auto got_count = [&](size_t n) {
    return std::make_pair(value.is_number_integer() &&
                              value.get<int64_t>() ==
                                  static_cast<int64_t>(n),
                          std::to_string(n));
  };

  if (kind == "group") {
    if (key == "contracting") {
      if (!st.contraction) st.contraction = is_contracting(*st.group, bound);
      return got_bool(st.contraction->known);
    }
    if (key == "nucleus_size") {
      return got_count(need_nucleus(st, bound).elements.size());
    }
    if (key == "condition2") {
      return got_bool(check_condition2(need_nucleus(st, bound)));
    }
    if (key == "pcf") return got_bool(check_pcf(need_nucleus(st, bound)));
    if (key == "strictly_pcf") {
      return got_bool(
          check_strictly_pcf(*st.group, need_nucleus(st, bound)));
    }
    if (key == "bounded") {
      bool all = true;
      for (Element g : st.group->generators) {
        all = all && is_bounded_element(g);
      }
      return got_bool(all);
    }
    if (key == "gluing_class_count") {
      return got_count(need_classes(st, bound).size());
    }
    if (key == "gluing_classes") {
      ordered_json wrap;
      wrap["alphabet_size"] = st.group->alphabet_size();
      wrap["classes"] = value;
      std::vector<GluingClass> expected =
          parse_structure_json(wrap.dump()).classes;
      std::sort(expected.begin(), expected.end());
      const auto& got = need_classes(st, bound);
      std::string shown;
      for (const auto& cls : got) {
        shown += (shown.empty() ? "" : "; ") + to_string(cls);
      }
      return {expected == got, shown};
    }
    if (key == "equivalent") {
      const Nucleus& nucleus = need_nucleus(st, bound);
      const int k = st.group->alphabet_size();
      for (const auto& item : value) {
        const bool expected = item.at("equal").get<bool>();
        const bool got = are_equivalent(
            nucleus, parse_word(item.at("lhs").get<std::string>(), k),
            parse_word(item.at("rhs").get<std::string>(), k));
        if (got != expected) {
          return {false, item.at("lhs").get<std::string>() + " ~ " +
                             item.at("rhs").get<std::string>() + " is " +
                             (got ? "true" : "false")};
        }
      }
      return {true, "all pairs"};
    }
    if (key == "class_of") {
      const Nucleus& nucleus = need_nucleus(st, bound);
      const int k = st.group->alphabet_size();
      for (const auto& item : value) {
        std::vector<std::string> expected;
        for (const auto& m : item.at("members")) {
          expected.push_back(m.get<std::string>());
        }
        std::sort(expected.begin(), expected.end());
        std::vector<std::string> got;
        for (const auto& w : equivalence_class(
                 nucleus,
                 parse_word(item.at("word").get<std::string>(), k))) {
          got.push_back(to_string(w));
        }
        std::sort(got.begin(), got.end());
        if (got != expected) {
          std::string shown;
          for (const auto& s : got) shown += (shown.empty() ? "" : ", ") + s;
          return {false, "class(" + item.at("word").get<std::string>() +
                             ") = {" + shown + "}"};
        }
      }
      return {true, "all classes"};
    }
    if (key == "tile_edges") {
      const Nucleus& nucleus = need_nucleus(st, bound);
      for (const auto& item : value) {
        const int level = item.at("level").get<int>();
        const size_t expected = item.at("count").get<size_t>();
        const size_t got = tile_graph(nucleus, level, bound).edges.size();
        if (got != expected) {
          return {false, "level " + std::to_string(level) + " has " +
                             std::to_string(got) + " edges"};
        }
      }
      return {true, "all levels"};
    }
    if (key == "critical_count") {
      return got_count(critical_sets(need_classes(st, bound)).critical.size());
    }
    if (key == "postcritical") {
      std::vector<std::string> expected;
      for (const auto& m : value) expected.push_back(m.get<std::string>());
      std::sort(expected.begin(), expected.end());
      std::vector<std::string> got;
      for (const auto& w :
           critical_sets(need_classes(st, bound)).postcritical) {
        got.push_back(to_string(w));
      }
      std::sort(got.begin(), got.end());
      std::string shown;
      for (const auto& s : got) shown += (shown.empty() ? "" : ", ") + s;
      return {got == expected, "{" + shown + "}"};
    }
  }

  if (kind == "structure") {
    if (key == "valid") {
      bool ok = true;
      try {
        validate_spec(*st.structure);
      } catch (const Error&) {
        ok = false;
      }
      return got_bool(ok);
    }
    if (key == "generators_before") {
      if (!st.synthesis) st.synthesis = synthesize(*st.structure);
      return got_count(st.synthesis->generators_before);
    }
    if (key == "generators_after") {
      if (!st.synthesis) st.synthesis = synthesize(*st.structure);
      return got_count(st.synthesis->group.names.size());
    }
    if (key == "roundtrip") {
      RoundtripReport rep = roundtrip_verify(*st.structure, bound);
      return got_bool(rep.ok);
    }
  }

  if (kind == "equations") {
    if (key == "classes") {
      return got_count(normalize_equations(*st.equations).classes.size());
    }
    if (key == "error_contains") {
      const std::string needle = value.get<std::string>();
      try {
        normalize_equations(*st.equations);
      } catch (const Error& e) {
        const std::string what = e.what();
        if (what.find(needle) != std::string::npos) return {true, what};
        return {false, what};
      }
      return {false, "accepted"};
    }
  }

  return {false, "unrecognized check \"" + key + "\""};
}

int run_corpus_verify(const std::string& dir) {
  const std::string manifest_path = dir + "/manifest.json";
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_file(manifest_path));
  } catch (const ordered_json::parse_error& e) {
    fail_invalid(manifest_path + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("entries") ||
      !manifest["entries"].is_array()) {
    fail_invalid(manifest_path + ": missing array \"entries\"");
  }

  size_t checks = 0;
  size_t mismatches = 0;
  for (const auto& entry : manifest["entries"]) {
    const std::string name = entry.at("name").get<std::string>();
    const std::string kind = entry.at("kind").get<std::string>();
    const std::string path = dir + "/" + entry.at("file").get<std::string>();
    const size_t bound = entry.contains("bound")
                             ? entry["bound"].get<size_t>()
                             : default_bound();
    EntryState st;
    std::string load_error;
    try {
      if (kind == "group") {
        st.group = load_group(path, bound);
      } else if (kind == "structure") {
        st.structure = parse_structure_json(read_file(path));
      } else if (kind == "equations") {
        st.equations = parse_equations_json(read_file(path));
      } else {
        load_error = "unrecognized kind \"" + kind + "\"";
      }
    } catch (const Error& e) {
      load_error = e.what();
    }

    if (!entry.contains("expected") || !entry["expected"].is_object()) {
      std::cout << name << ": MISMATCH (no expected values)\n";
      ++checks;
      ++mismatches;
      continue;
    }
    for (const auto& [key, wrapped] : entry["expected"].items()) {
      ++checks;
      if (!load_error.empty()) {
        std::cout << name << "." << key << ": MISMATCH (" << load_error
                  << ")\n";
        ++mismatches;
        continue;
      }
      if (!wrapped.is_object() || !wrapped.contains("value")) {
        std::cout << name << "." << key
                  << ": MISMATCH (malformed expected value)\n";
        ++mismatches;
        continue;
      }
      bool ok = false;
      std::string got;
      try {
        std::tie(ok, got) =
            corpus_check(kind, key, wrapped["value"], st, bound);
      } catch (const Error& e) {
        ok = false;
        got = e.what();
      }
      if (ok) {
        std::cout << name << "." << key << ": ok\n";
      } else {
        std::cout << name << "." << key << ": MISMATCH (expected "
                  << render(wrapped["value"]) << ", got " << got << ")\n";
        ++mismatches;
      }
    }
  }
  std::cout << "corpus: " << checks << " checks, " << mismatches
            << " mismatches\n";
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exact arithmetic, nucleus computation, and limit-space analysis for "
      "self-similar groups"};
  app.require_subcommand(1);
  const size_t bound_default = default_bound();

  std::string input;
  std::string output;
  std::string lhs, rhs;
  std::string format = "dot";
  std::string corpus_dir = "data/corpus";
  size_t bound = bound_default;
  int level = 1;
  bool flag_dot = false, flag_condition2 = false, flag_pcf = false;
  bool flag_bounded = false, flag_strict = false, flag_all = false;
  bool flag_sets = false, flag_report = false;

  auto add_common = [&](CLI::App* sub, bool with_bound = true) {
    sub->add_option("-i,--input", input, "input file")->required();
    if (with_bound) {
      sub->add_option("--bound", bound,
                      "cap on distinct elements before giving up");
    }
  };

  CLI::App* c_nucleus =
      app.add_subcommand("nucleus", "compute the nucleus of a group file");
  add_common(c_nucleus);
  c_nucleus->add_flag("--dot", flag_dot, "emit the Moore diagram as DOT");
  c_nucleus->add_option("-o,--output", output, "write to file instead of stdout");

  CLI::App* c_check =
      app.add_subcommand("check", "decide structural properties");
  add_common(c_check);
  c_check->add_flag("--condition2", flag_condition2,
                    "identifications survive appending letters");
  c_check->add_flag("--pcf", flag_pcf, "post-critical set is finite");
  c_check->add_flag("--bounded", flag_bounded, "all generators are bounded");
  c_check->add_flag("--strict-pcf", flag_strict,
                    "nucleus moves at most one letter per word");
  c_check->add_flag("--all", flag_all, "check everything (default)");

  CLI::App* c_equiv = app.add_subcommand(
      "equiv", "decide boundary-word equivalence (or list a class)");
  add_common(c_equiv);
  c_equiv->add_option("--lhs", lhs, "left word, e.g. 1*00")->required();
  c_equiv->add_option("--rhs", rhs,
                      "right word; omitted = list the class of --lhs");

  CLI::App* c_glue = app.add_subcommand(
      "glue", "extract the gluing classes of the limit space");
  add_common(c_glue);
  c_glue->add_flag("--sets", flag_sets,
                   "print critical/post-critical words instead of JSON");
  c_glue->add_option("-o,--output", output, "write to file instead of stdout");

  CLI::App* c_moore =
      app.add_subcommand("moore", "emit the automaton's Moore diagram as DOT");
  add_common(c_moore);
  c_moore->add_option("-o,--output", output, "write to file instead of stdout");

  CLI::App* c_tiles =
      app.add_subcommand("tiles", "adjacency graph of level-n tiles");
  add_common(c_tiles);
  c_tiles->add_option("--level", level, "tile depth")->required();
  c_tiles->add_option("--format", format, "dot or json")
      ->check(CLI::IsMember({"dot", "json"}));
  c_tiles->add_option("-o,--output", output, "write to file instead of stdout");

  CLI::App* c_construct = app.add_subcommand(
      "construct", "synthesize a group file from a structure or equations");
  add_common(c_construct, false);
  c_construct->add_flag("--report", flag_report,
                        "print merge report to stderr");
  c_construct->add_option("-o,--output", output,
                          "write to file instead of stdout");

  CLI::App* c_roundtrip = app.add_subcommand(
      "roundtrip", "synthesize, re-extract, and compare a structure");
  add_common(c_roundtrip);

  CLI::App* c_corpus = app.add_subcommand("corpus", "bundled example corpus");
  c_corpus->require_subcommand(1);
  CLI::App* c_verify = c_corpus->add_subcommand(
      "verify", "recompute every expected value in the corpus manifest");
  c_verify->add_option("--dir", corpus_dir, "corpus directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_nucleus)) {
      return run_nucleus(input, bound, flag_dot, output);
    }
    if (app.got_subcommand(c_check)) {
      return run_check(input, bound, flag_condition2, flag_pcf, flag_bounded,
                       flag_strict, flag_all);
    }
    if (app.got_subcommand(c_equiv)) return run_equiv(input, bound, lhs, rhs);
    if (app.got_subcommand(c_glue)) {
      return run_glue(input, bound, flag_sets, output);
    }
    if (app.got_subcommand(c_moore)) return run_moore(input, bound, output);
    if (app.got_subcommand(c_tiles)) {
      return run_tiles(input, bound, level, format, output);
    }
    if (app.got_subcommand(c_construct)) {
      return run_construct(input, flag_report, output);
    }
    if (app.got_subcommand(c_roundtrip)) return run_roundtrip(input, bound);
    if (app.got_subcommand(c_corpus)) return run_corpus_verify(corpus_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::InvalidInput:
        return 2;
      case ErrorKind::BoundExceeded:
        return 3;
      case ErrorKind::Internal:
        return 4;
    }
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
