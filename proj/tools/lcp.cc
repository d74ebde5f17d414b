#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lcp/config.h"
#include "lcp/errors.h"
#include "lcp/models.h"
#include "lcp/rng.h"
#include "lcp/stages.h"

namespace {

std::string kebab(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

struct GradcheckOptions {
  std::string model = "salstm";
  int input = 4;
  int embed = 8;
  int hidden = 8;
  int steps = 6;
  int batch = 3;
  double eps = 1e-5;
  double tol = 1e-4;
  std::uint64_t seed = 1;
};

int run_gradcheck(const GradcheckOptions& o) {
  const auto kind = lcp::parse_model_kind(o.model);
  if (!kind) throw lcp::ArgumentError("gradcheck: unknown model " + o.model);
  lcp::ModelSpec spec;
  spec.kind = *kind;
  spec.input_dim = o.input;
  spec.embed_dim = o.embed;
  spec.hidden_dim = o.hidden;
  spec.n = o.steps;
  spec.ffnn_hidden = {o.hidden, o.embed};
  auto model = lcp::build(spec, o.seed);
  lcp::Rng rng(o.seed + 1);
  std::vector<lcp::Segment> segments;
  for (int b = 0; b < o.batch; ++b) {
    lcp::Segment s;
    s.steps = o.steps;
    s.dim = o.input;
    s.label = lcp::maneuver_from_index(b % lcp::kNumClasses);
    for (int i = 0; i < o.steps * o.input; ++i) s.features.push_back(rng.normal());
    segments.push_back(std::move(s));
  }
  const lcp::Batch batch = lcp::make_batch(segments, o.steps, o.input);
  const auto report = lcp::check_model_gradients(*model, batch, o.eps, o.tol);
  std::cout << "gradcheck: " << lcp::display_name(*kind) << " input " << o.input
            << " embed " << o.embed << " hidden " << o.hidden << " n " << o.steps
            << " batch " << o.batch << "\n"
            << "parameters checked: " << report.checked << "\n"
            << "max relative error: " << report.max_rel_error << " (block "
            << report.worst_block << ", index " << report.worst_index << ")\n"
            << "max absolute error: " << report.max_abs_error << "\n"
            << (report.passed ? "PASS" : "FAIL") << " at tol " << o.tol << "\n";
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lane-change intention toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  std::string out_dir = "lcp_run";
  bool quiet = false;
  app.add_option("--config", config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "run directory holding every stage's artifacts");
  app.add_flag("--quiet", quiet, "no progress output");

  lcp::RunConfig defaults;
  std::map<std::string, std::string> overrides;
  for (const std::string& key : lcp::config_keys()) {
    app.add_option_function<std::string>(
           "--" + kebab(key),
           [&overrides, key](const std::string& v) { overrides[key] = v; },
           "config key " + key + " (default " + defaults.get(key) + ")")
        ->group("Config overrides");
  }

  std::vector<std::string> tables;
  std::string site;
  const auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--table", tables, "trajectory table (repeatable)");
    sub->add_option("--site", site, "site geometry file");
  };

  auto* synth = app.add_subcommand("synth", "generate synthetic recordings");
  auto* ingest = app.add_subcommand("ingest", "convert and split trajectory tables");
  add_inputs(ingest);
  auto* label = app.add_subcommand("label", "detect lane changes and label frames");
  auto* featurize = app.add_subcommand("featurize", "compute and normalize features");
  auto* train = app.add_subcommand("train", "train one model");
  auto* eval = app.add_subcommand("eval", "confusion matrix and prediction time");
  auto* sweep = app.add_subcommand("sweep", "history-length sweep over kinds and seeds");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  GradcheckOptions go;
  gradcheck->add_option("--model", go.model, "salstm, ffnn or logreg");
  gradcheck->add_option("--input", go.input, "input dimension");
  gradcheck->add_option("--embed", go.embed, "embedding dimension");
  gradcheck->add_option("--hidden", go.hidden, "LSTM hidden dimension");
  gradcheck->add_option("--steps", go.steps, "segment length n");
  gradcheck->add_option("--batch", go.batch, "batch size");
  gradcheck->add_option("--eps", go.eps, "finite-difference step");
  gradcheck->add_option("--tol", go.tol, "relative error tolerance");
  gradcheck->add_option("--seed", go.seed, "init and data seed");
  auto* replicate = app.add_subcommand("replicate", "full pipeline for every model kind");
  std::string data = "synthetic";
  replicate->add_option("--data", data, "synthetic or recorded")
      ->check(CLI::IsMember({"synthetic", "recorded"}));
  add_inputs(replicate);
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  try {
    if (chosen == gradcheck) return run_gradcheck(go);

    lcp::RunConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      config = lcp::parse_run_config(in);
    }
    for (const auto& [key, value] : overrides) config.set(key, value);
    config.validate();

    const lcp::RunLayout layout{out_dir};
    std::ostringstream sink;
    std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : std::cerr;
    lcp::IngestInputs inputs;
    for (const auto& t : tables) inputs.tables.emplace_back(t);
    inputs.site = site;

    if (chosen == synth) {
      lcp::stage_synth(config, layout, log);
    } else if (chosen == ingest) {
      lcp::stage_ingest(config, layout, inputs, log);
    } else if (chosen == label) {
      lcp::stage_label(config, layout, log);
    } else if (chosen == featurize) {
      lcp::stage_featurize(config, layout, log);
    } else if (chosen == train) {
      lcp::stage_train(config, layout, log);
    } else if (chosen == eval) {
      const auto e = lcp::stage_eval(config, layout, log);
      std::cout << (e.dir / "report.json").string() << "\n";
    } else if (chosen == sweep) {
      lcp::stage_sweep(config, layout, log);
    } else if (chosen == replicate) {
      if (data == "synthetic" && !inputs.tables.empty()) {
        throw lcp::ArgumentError("replicate: --table given with --data synthetic");
      }
      if (data == "recorded" && inputs.tables.empty()) {
        throw lcp::ArgumentError("replicate: --data recorded needs --table and --site");
      }
      lcp::stage_replicate(config, layout, inputs, log);
      std::cout << (layout.replicate() / "model_comparison.csv").string() << "\n";
    }
  } catch (const lcp::IncompatibleError& e) {
    std::cerr << "lcp " << command << ": incompatible artifacts: " << e.what() << "\n";
    return 3;
  } catch (const lcp::StageError& e) {
    std::cerr << "lcp " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const lcp::Error& e) {
    std::cerr << "lcp " << command << ": error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lcp " << command << ": unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
