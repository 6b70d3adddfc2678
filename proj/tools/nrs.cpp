#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "nrs/error.hpp"
#include "nrs/io.hpp"
#include "nrs/pipeline.hpp"
#include "nrs/split.hpp"
#include "nrs/synthetic.hpp"
#include "nrs/util.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string from_stage = "pre";
  std::string format = "csv";
  std::string style = "list";
  std::string model;
  std::string reranker = "none";
};

nrs::ExperimentConfig load_config(const Options& o) {
  auto cfg = nrs::ExperimentConfig::load(o.config);
  if (o.seed) cfg.override_seed(*o.seed);
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

void print_warnings(const nrs::SaveState& s) {
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << "\n";
}

void print_report(const nrs::ExperimentConfig& cfg, const std::string& format) {
  const auto doc = nlohmann::json::parse(nrs::read_file(cfg.output_dir / "reports/report.json"));
  if (format == "json") {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << nrs::report_csv(doc);
  }
}

int run_stages(const Options& o, nrs::Stage from, nrs::Stage to) {
  const auto cfg = load_config(o);
  const auto state = nrs::run(cfg, from, to);
  print_warnings(state);
  std::cerr << "wrote " << state.dir.string() << "\n";
  return 0;
}

int cmd_validate(const Options& o) {
  const auto cfg = load_config(o);
  const auto d = nrs::prepare_data(cfg);
  const auto& r = d.clean_report;
  std::cout << "items: " << d.corpus.items.size() << " (removed " << r.items_removed << ")\n"
            << "users: " << d.corpus.histories.size() << " (removed " << r.users_removed << ")\n"
            << "impressions: " << d.corpus.impressions.size() << " (removed "
            << r.impressions_removed << ", cold test users " << r.test_users_removed << ")\n"
            << "history events removed: " << r.history_events_removed << "\n"
            << "impression entries removed: " << r.impression_entries_removed << "\n"
            << "pool: " << d.pool.size() << "\n";
  return 0;
}

int cmd_ntv(const Options& o) {
  const auto cfg = load_config(o);
  const auto row = nrs::ntv(cfg.ntd, cfg.list_size, cfg.ntv_targets);
  if (o.format == "json") {
    nlohmann::ordered_json j;
    const auto values = row.values();
    for (std::size_t c = 0; c < nrs::kTableColumns.size(); ++c) {
      j[std::string(nrs::kTableColumns[c])] =
          values[c] ? nlohmann::ordered_json(*values[c]) : nlohmann::ordered_json();
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << nrs::table_header_csv() << "\n" << nrs::table_row_csv("ntv", "", row) << "\n";
  }
  return 0;
}

int cmd_export(const Options& o) {
  const auto cfg = load_config(o);
  std::string model = o.model.empty() ? cfg.models.front().name : o.model;
  const auto path = cfg.output_dir / nrs::recommendations_file(model, o.reranker);
  const auto doc = nrs::export_jrex(nrs::read_ranked_lists(path), cfg.experiment_id, o.style);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_split(const Options& o) {
  const auto cfg = load_config(o);
  if (!cfg.split) throw nrs::ValidationError("config has no split section");
  auto [corpus, report] = nrs::clean_corpus(nrs::load_corpus(
      cfg.corpus.items, cfg.corpus.history, cfg.corpus.impressions, cfg.corpus.party_map));
  const auto split = nrs::make_split(corpus, *cfg.split);
  nrs::write_split(cfg.output_dir / "split", split);
  std::cout << "train pairs: " << split.train_pairs.size()
            << ", test pairs: " << split.test_pairs.size()
            << ", dropped: " << split.dropped_pairs << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity-aware news recommendation pipeline"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    auto* c = sub->add_option("--config", o.config, "Experiment config (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the global seed");
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* validate = app.add_subcommand("validate", "Load and clean the corpus, print a summary");
  add_common(validate);
  auto* split = app.add_subcommand("split", "Write the train/test split");
  add_common(split);
  auto* recommend = app.add_subcommand("recommend", "Run pre-processing and candidate generation");
  add_common(recommend);
  auto* rerank = app.add_subcommand("rerank", "Re-rank saved candidates (post-processing)");
  add_common(rerank);
  auto* simulate = app.add_subcommand("simulate", "Run user simulation (post-processing)");
  add_common(simulate);
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate saved recommendations");
  add_common(evaluate);
  evaluate->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* ntv = app.add_subcommand("ntv", "Print the normative target values row");
  add_common(ntv);
  ntv->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* exp = app.add_subcommand("export", "Export recommendations as JREX");
  add_common(exp);
  exp->add_option("--style", o.style, "Visualization style");
  exp->add_option("--model", o.model, "Model name (default: first model)");
  exp->add_option("--reranker", o.reranker, "Reranker name");
  auto* run = app.add_subcommand("run", "Run the pipeline");
  add_common(run);
  run->add_option("--from-stage", o.from_stage, "pre, in, post or eval")
      ->check(CLI::IsMember({"pre", "in", "post", "eval"}));
  run->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* synth = app.add_subcommand("synth", "Write the synthetic corpus");
  std::string synth_out = "data/synthetic";
  std::uint64_t synth_seed = nrs::SyntheticOptions{}.seed;
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--seed", synth_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*split) return cmd_split(o);
    if (*recommend) return run_stages(o, nrs::Stage::Pre, nrs::Stage::In);
    if (*rerank || *simulate) return run_stages(o, nrs::Stage::Post, nrs::Stage::Post);
    if (*evaluate) {
      run_stages(o, nrs::Stage::Eval, nrs::Stage::Eval);
      print_report(load_config(o), o.format);
      return 0;
    }
    if (*ntv) return cmd_ntv(o);
    if (*exp) return cmd_export(o);
    if (*run) {
      run_stages(o, *nrs::parse_stage(o.from_stage), nrs::Stage::Eval);
      print_report(load_config(o), o.format);
      return 0;
    }
    if (*synth) {
      nrs::SyntheticOptions so;
      so.seed = synth_seed;
      nrs::write_corpus(synth_out, nrs::make_synthetic(so));
      return 0;
    }
  } catch (const nrs::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nrs::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
