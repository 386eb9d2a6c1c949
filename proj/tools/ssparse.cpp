#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssparse/bridge.hpp"
#include "ssparse/chart_parser.hpp"
#include "ssparse/grammar.hpp"
#include "ssparse/mebn.hpp"
#include "ssparse/ssparser.hpp"
#include "ssparse/tree.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParseFailure = 1;
constexpr int kExitInputError = 2;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ssparse::Error("cannot read file '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> gather_sentences(const std::vector<std::string>& words,
                                          const std::string& batch_path) {
  std::vector<std::string> sentences;
  if (!batch_path.empty()) {
    std::istringstream in(read_file(batch_path));
    std::string line;
    while (std::getline(in, line))
      if (!tokenize(line).empty()) sentences.push_back(line);
    return sentences;
  }
  std::string joined;
  for (const auto& w : words) {
    if (!joined.empty()) joined += " ";
    joined += w;
  }
  if (!tokenize(joined).empty()) sentences.push_back(joined);
  return sentences;
}

ssparse::TreeFormat parse_format(const std::string& name) {
  if (name == "tree") return ssparse::TreeFormat::Ascii;
  if (name == "json") return ssparse::TreeFormat::Json;
  return ssparse::TreeFormat::Bracketed;
}

void print_parse(const ssparse::ParseTree& tree, double probability,
                 const std::string& format,
                 const nlohmann::json* trace) {
  if (format == "json") {
    nlohmann::json out = {{"tree", ssparse::tree_to_json(tree)},
                          {"probability", probability}};
    if (trace) out["trace"] = *trace;
    std::cout << out.dump() << "\n";
    return;
  }
  std::cout << ssparse::render_tree(tree, parse_format(format));
  if (format != "tree") std::cout << "\n";
  std::cout << "p = " << sci(probability) << "\n";
  if (trace) std::cout << "trace: " << trace->dump() << "\n";
}

ssparse::mebn::GroundedVariable parse_grounded(const std::string& spec) {
  ssparse::mebn::GroundedVariable gv;
  std::string head = spec;
  auto open = spec.find('(');
  if (open != std::string::npos) {
    if (spec.back() != ')')
      throw ssparse::Error("malformed variable '" + spec + "'");
    head = spec.substr(0, open);
    std::string inner = spec.substr(open + 1, spec.size() - open - 2);
    std::istringstream in(inner);
    std::string arg;
    while (std::getline(in, arg, ',')) {
      arg.erase(0, arg.find_first_not_of(" \t"));
      arg.erase(arg.find_last_not_of(" \t") + 1);
      if (!arg.empty()) gv.args.push_back(arg);
    }
  }
  gv.variable = head;
  return gv;
}

ssparse::mebn::Evidence parse_evidence(const std::vector<std::string>& specs) {
  ssparse::mebn::Evidence out;
  for (const std::string& spec : specs) {
    auto eq = spec.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw ssparse::Error("evidence must look like 'var(a,b)=STATE': '" +
                           spec + "'");
    out[parse_grounded(spec.substr(0, eq))] = spec.substr(eq + 1);
  }
  return out;
}

int classify(const std::exception& e) {
  if (dynamic_cast<const ssparse::TokenError*>(&e)) return kExitParseFailure;
  if (dynamic_cast<const ssparse::NoParseError*>(&e)) return kExitParseFailure;
  return kExitInputError;
}

int cmd_validate(const std::string& grammar_path,
                 const std::string& mtheory_path) {
  int violations = 0;
  ssparse::Pcfg g = ssparse::load_grammar(read_file(grammar_path));
  for (const auto& v : ssparse::validate_normalization(g)) {
    std::cout << "grammar: nonterminal " << v.nonterminal
              << " probabilities sum to " << sci(v.sum) << "\n";
    ++violations;
  }
  if (!mtheory_path.empty()) {
    ssparse::mebn::MTheory t =
        ssparse::mebn::parse_mtheory(read_file(mtheory_path));
    for (const auto& v : ssparse::mebn::validate_mtheory(t)) {
      std::cout << "mtheory: [" << v.invariant << "] ";
      if (!v.mfrag.empty()) std::cout << v.mfrag << ": ";
      std::cout << v.detail << "\n";
      ++violations;
    }
  }
  if (violations == 0) {
    std::cout << "OK\n";
    return kExitOk;
  }
  return kExitParseFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic CYK parsing over CNF PCFGs with "
               "knowledge-based ambiguity resolution"};
  app.require_subcommand(1);

  std::string grammar_path, mtheory_path, batch_path;
  std::string format = "bracket";
  std::string mode = "literal";
  bool trace = false;
  bool all = false;
  int depth_limit = ssparse::mebn::kDefaultDepthLimit;
  std::vector<std::string> words;
  std::vector<std::string> evidence_specs;

  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"tree", "bracket", "json"}));
  };
  auto add_depth = [&](CLI::App* cmd) {
    cmd->add_option("--depth-limit", depth_limit, "SSBN grounding depth limit")
        ->check(CLI::PositiveNumber)
        ->envname("SSPARSE_DEPTH_LIMIT");
  };

  CLI::App* validate =
      app.add_subcommand("validate", "Check grammar normalization and "
                                     "MTheory invariants");
  validate->add_option("--grammar", grammar_path, "Grammar file")->required();
  validate->add_option("--mtheory", mtheory_path, "MTheory JSON file");

  CLI::App* parse = app.add_subcommand("parse", "Viterbi parse");
  parse->add_option("--grammar", grammar_path, "Grammar file")->required();
  add_format(parse);
  parse->add_flag("--all", all, "Print every parse, best first");
  parse->add_option("--batch", batch_path, "File with one sentence per line");
  parse->add_option("sentence", words, "Sentence tokens");

  CLI::App* sparse =
      app.add_subcommand("sparse", "Parse with knowledge-based "
                                   "ambiguity resolution");
  sparse->add_option("--grammar", grammar_path, "Grammar file")->required();
  sparse->add_option("--mtheory", mtheory_path, "MTheory JSON file")
      ->required();
  sparse->add_option("--mode", mode, "Conflation comparison mode")
      ->check(CLI::IsMember({"literal", "normalized"}));
  sparse->add_flag("--trace", trace, "Append the decision trace as JSON");
  add_format(sparse);
  add_depth(sparse);
  sparse->add_option("--batch", batch_path, "File with one sentence per line");
  sparse->add_option("sentence", words, "Sentence tokens");

  CLI::App* query = app.add_subcommand("query", "Posterior of a grounded "
                                                "resident variable");
  query->add_option("--mtheory", mtheory_path, "MTheory JSON file")
      ->required();
  query->add_option("--grammar", grammar_path,
                    "Optional grammar whose bridge should be induced first");
  query->add_option("--evidence", evidence_specs,
                    "Evidence as var(a,b)=STATE; repeatable");
  add_depth(query);
  query->add_option("variable", words, "Variable name followed by entity args")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(grammar_path, mtheory_path);

    if (parse->parsed() || sparse->parsed()) {
      ssparse::Pcfg g = ssparse::load_grammar(read_file(grammar_path));
      ssparse::mebn::MTheory theory;
      ssparse::SparseOptions options;
      if (sparse->parsed()) {
        theory = ssparse::mebn::load_mtheory(read_file(mtheory_path));
        options.mode = mode == "normalized" ? ssparse::ResolutionMode::Normalized
                                            : ssparse::ResolutionMode::Literal;
        options.depth_limit = depth_limit;
      }

      std::vector<std::string> sentences = gather_sentences(words, batch_path);
      if (sentences.empty()) {
        std::cerr << "error: no sentence given\n";
        return kExitInputError;
      }

      int worst = kExitOk;
      for (const std::string& sentence : sentences) {
        std::vector<std::string> tokens = tokenize(sentence);
        try {
          if (sparse->parsed()) {
            ssparse::SemanticParseResult r =
                ssparse::parse_with_semantics(g, theory, tokens, options);
            nlohmann::json tj;
            if (trace) tj = ssparse::trace_to_json(r.trace);
            print_parse(r.tree, r.probability, format, trace ? &tj : nullptr);
          } else if (all) {
            auto parses = ssparse::enumerate_parses(g, tokens);
            if (parses.empty())
              throw ssparse::NoParseError("no parse: start symbol '" +
                                          g.start() +
                                          "' does not span the input");
            if (format == "json") {
              nlohmann::json out = nlohmann::json::array();
              for (const auto& p : parses)
                out.push_back({{"tree", ssparse::tree_to_json(p.tree)},
                               {"probability", p.probability}});
              std::cout << out.dump() << "\n";
            } else {
              for (size_t i = 0; i < parses.size(); ++i)
                std::cout << "parse " << i + 1 << ": "
                          << ssparse::render_tree(parses[i].tree,
                                                  ssparse::TreeFormat::Bracketed)
                          << " p = " << sci(parses[i].probability) << "\n";
            }
          } else {
            ssparse::ViterbiResult r = ssparse::viterbi_parse(g, tokens);
            print_parse(r.tree, r.probability, format, nullptr);
          }
        } catch (const std::exception& e) {
          std::cerr << "error: " << e.what() << "\n";
          worst = std::max(worst, classify(e));
          if (batch_path.empty()) return worst;
        }
      }
      return worst;
    }

    if (query->parsed()) {
      ssparse::mebn::MTheory theory =
          ssparse::mebn::load_mtheory(read_file(mtheory_path));
      if (!grammar_path.empty()) {
        ssparse::Pcfg g = ssparse::load_grammar(read_file(grammar_path));
        theory = ssparse::induce_bridge(g, theory).first;
      }
      ssparse::mebn::GroundedVariable gv;
      gv.variable = words.at(0);
      gv.args.assign(words.begin() + 1, words.end());
      if (gv.args.empty() && gv.variable.find('(') != std::string::npos)
        gv = parse_grounded(gv.variable);

      ssparse::mebn::Ssbn net = ssparse::mebn::build_ssbn(
          theory, gv, parse_evidence(evidence_specs), depth_limit);
      std::vector<double> post = ssparse::mebn::infer(net, gv);
      const ssparse::mebn::SsbnNode* node = net.find(gv);
      nlohmann::json out = {{"variable", gv.str()},
                            {"states", node->states},
                            {"posterior", post}};
      std::cout << out.dump() << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
  return kExitOk;
}
