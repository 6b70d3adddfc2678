#include "nrs/pipeline.hpp"

#include <algorithm>
#include <array>
#include <exception>
#include <set>

#include "nrs/error.hpp"
#include "nrs/io.hpp"
#include "nrs/report.hpp"
#include "nrs/util.hpp"

namespace nrs {

namespace fs = std::filesystem;

namespace {

constexpr std::array kStages = {Stage::Pre, Stage::In, Stage::Post, Stage::Eval};

std::string stage_name(Stage s) { return std::string(to_string(s)); }

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

std::string path_hash(const fs::path& p) {
  if (!fs::exists(p)) throw IoError("cannot open '" + p.string() + "'");
  return sha256_file(p);
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
  std::exception_ptr error;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(nrs_pipeline_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> diff_keys(const nlohmann::json& a, const nlohmann::json& b,
                                   const std::string& prefix = "") {
  std::vector<std::string> out;
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.items()) keys.insert(k);
    for (const auto& [k, v] : b.items()) keys.insert(k);
    for (const auto& k : keys) {
      const auto path = prefix.empty() ? k : prefix + "." + k;
      if (!a.contains(k) || !b.contains(k)) {
        out.push_back(path);
      } else {
        auto sub = diff_keys(a[k], b[k], path);
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
  } else if (a != b) {
    out.push_back(prefix.empty() ? "<root>" : prefix);
  }
  return out;
}

class StageWriter {
 public:
  StageWriter(fs::path dir, StageRecord& record) : dir_(std::move(dir)), record_(record) {}

  void write(const std::string& rel, const std::string& contents) {
    write_file(dir_ / rel, contents);
    record_.files[rel] = sha256_hex(contents);
  }

 private:
  fs::path dir_;
  StageRecord& record_;
};

std::map<std::string, std::vector<std::string>, std::less<>> impression_items(
    const Corpus& corpus) {
  std::map<std::string, std::set<std::string>, std::less<>> seen;
  for (const auto& im : corpus.impressions) {
    for (const auto& e : im.shown) seen[im.user_id].insert(e.item_id);
  }
  std::map<std::string, std::vector<std::string>, std::less<>> out;
  for (auto& [u, s] : seen) out[u] = {s.begin(), s.end()};
  return out;
}

ModelConfig effective_model(const ExperimentConfig& cfg, const ModelConfig& m) {
  ModelConfig out = m;
  out.list_size = cfg.candidates_for(m);
  if (!out.ntd) out.ntd = cfg.ntd;
  return out;
}

const RerankConfig& simulation_dap(const ExperimentConfig& cfg, RerankConfig& fallback) {
  for (const auto& r : cfg.rerankers) {
    if (r.method == RerankMethod::DAP) return r;
  }
  fallback = RerankConfig{};
  fallback.name = "dap";
  fallback.method = RerankMethod::DAP;
  fallback.ntd = cfg.ntd;
  fallback.list_size = cfg.list_size;
  return fallback;
}

nlohmann::json table_json(const TableRow& row) {
  nlohmann::json j = nlohmann::json::object();
  const auto values = row.values();
  for (std::size_t c = 0; c < kTableColumns.size(); ++c) {
    j[std::string(kTableColumns[c])] = values[c] ? nlohmann::json(*values[c]) : nlohmann::json();
  }
  return j;
}

TableRow table_from_json(const nlohmann::json& j) {
  std::array<std::optional<double>, 13> v;
  for (std::size_t c = 0; c < kTableColumns.size(); ++c) {
    auto it = j.find(std::string(kTableColumns[c]));
    if (it != j.end() && it->is_number()) v[c] = it->get<double>();
  }
  TableRow r;
  r.activation = v[0];
  r.cat_calibration = v[1];
  r.comp_calibration = v[2];
  r.fragmentation = v[3];
  r.alt_voices = v[4];
  r.representation = v[5];
  r.cat_gini = v[6];
  r.sent_gini = v[7];
  r.party_gini = v[8];
  r.cat_ild = v[9];
  r.sent_ild = v[10];
  r.party_ild = v[11];
  r.auc = v[12];
  return r;
}

}  // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Pre: return "pre";
    case Stage::In: return "in";
    case Stage::Post: return "post";
    case Stage::Eval: return "eval";
  }
  return "pre";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (auto st : kStages) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (list_size == 0) throw ValidationError("list_size must be >= 1");
  if (candidate_size && *candidate_size < list_size) {
    throw ValidationError("candidate_size must be >= list_size");
  }
  if (models.empty()) throw ValidationError("config lists no models");
  ntd.validate();
  if (split) split->validate();
  std::set<std::string> names;
  for (const auto& m : models) {
    effective_model(*this, m).validate();
    if (!names.insert(m.name).second) throw ValidationError("duplicate model name '" + m.name + "'");
  }
  names.clear();
  for (const auto& r : rerankers) {
    r.validate();
    if (!names.insert(r.name).second) {
      throw ValidationError("duplicate reranker name '" + r.name + "'");
    }
  }
  if (behavior) behavior->validate();
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    c.experiment_id = j.value("experiment_id", std::string("experiment"));
    c.seed = j.value("seed", std::uint64_t{0});
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    const auto& corpus = j.at("corpus");
    c.corpus.items = resolve(base_dir, corpus.at("items").get<std::string>());
    c.corpus.history = resolve(base_dir, corpus.at("history").get<std::string>());
    c.corpus.impressions = resolve(base_dir, corpus.at("impressions").get<std::string>());
    c.corpus.party_map = resolve(base_dir, corpus.at("party_map").get<std::string>());
    if (corpus.contains("article_pool")) {
      const auto& pool = corpus["article_pool"];
      if (pool.is_string()) {
        const auto mode = pool.get<std::string>();
        if (mode == "catalog") {
          c.pool_from_catalog = true;
        } else if (mode != "impressions") {
          throw ValidationError("corpus.article_pool must be 'impressions', 'catalog' or a list");
        }
      } else {
        c.article_pool = pool.get<std::vector<std::string>>();
      }
    }
    if (j.contains("clean")) {
      c.clean.drop_cold_test_users = j["clean"].value("drop_cold_test_users", true);
    }
    if (j.contains("split")) {
      c.split = SplitSpec::from_json(j["split"]);
      if (!j["split"].contains("seed")) c.split->seed = c.seed;
      c.explicit_seeds_["split"] = j["split"].contains("seed");
    }
    if (j.contains("ntd")) c.ntd = NTD::from_json(j["ntd"]);
    c.list_size = j.value("list_size", std::size_t{20});
    if (j.contains("candidate_size")) c.candidate_size = j["candidate_size"].get<std::size_t>();
    for (std::size_t k = 0; k < j.at("models").size(); ++k) {
      const auto& mj = j["models"][k];
      auto m = ModelConfig::from_json(mj);
      if (!mj.contains("seed")) m.seed = c.seed;
      c.explicit_seeds_["model:" + std::to_string(k)] = mj.contains("seed");
      c.models.push_back(std::move(m));
    }
    if (j.contains("rerankers")) {
      for (const auto& rj : j["rerankers"]) {
        auto r = RerankConfig::from_json(rj);
        if (!rj.contains("ntd")) r.ntd = c.ntd;
        if (!rj.contains("list_size")) r.list_size = c.list_size;
        c.rerankers.push_back(std::move(r));
      }
    }
    if (j.contains("behavior")) {
      c.behavior = BehaviorConfig::from_json(j["behavior"]);
      if (!j["behavior"].contains("seed")) c.behavior->seed = c.seed;
      c.explicit_seeds_["behavior"] = j["behavior"].contains("seed");
    }
    c.metrics.seed = c.seed;
    if (j.contains("metrics")) {
      const auto& mj = j["metrics"];
      c.metrics.fragmentation_sample = mj.value("fragmentation_sample", std::size_t{10});
      c.metrics.alpha = mj.value("alpha", 0.5);
      const auto mode = mj.value("fragmentation_mode", std::string("recs_vs_recs"));
      if (mode == "recs_vs_recs") {
        c.metrics.fragmentation_mode = FragmentationMode::RecsVsRecs;
      } else if (mode == "history_vs_recs") {
        c.metrics.fragmentation_mode = FragmentationMode::HistoryVsRecs;
      } else {
        throw ValidationError("metrics.fragmentation_mode must be recs_vs_recs or history_vs_recs");
      }
      if (mj.contains("seed")) c.metrics.seed = mj["seed"].get<std::uint64_t>();
      c.explicit_seeds_["metrics"] = mj.contains("seed");
      if (mj.contains("ntv_targets")) {
        const auto& t = mj["ntv_targets"];
        c.ntv_targets.activation = t.value("activation", c.ntv_targets.activation);
        c.ntv_targets.cat_calibration = t.value("cat_calibration", c.ntv_targets.cat_calibration);
        c.ntv_targets.comp_calibration =
            t.value("comp_calibration", c.ntv_targets.comp_calibration);
        c.ntv_targets.fragmentation = t.value("fragmentation", c.ntv_targets.fragmentation);
        c.ntv_targets.alt_voices = t.value("alt_voices", c.ntv_targets.alt_voices);
        c.ntv_targets.representation = t.value("representation", c.ntv_targets.representation);
        c.ntv_targets.auc = t.value("auc", c.ntv_targets.auc);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

void ExperimentConfig::override_seed(std::uint64_t s) {
  seed = s;
  auto derived = [&](const std::string& key) {
    auto it = explicit_seeds_.find(key);
    return it == explicit_seeds_.end() || !it->second;
  };
  if (split && derived("split")) split->seed = s;
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (derived("model:" + std::to_string(k))) models[k].seed = s;
  }
  if (behavior && derived("behavior")) behavior->seed = s;
  if (derived("metrics")) metrics.seed = s;
}

std::size_t ExperimentConfig::candidates_for(const ModelConfig& m) const {
  if (candidate_size) return m.needs_ntd() ? list_size : *candidate_size;
  return m.needs_ntd() ? list_size : std::max<std::size_t>(100, list_size);
}

nlohmann::json ExperimentConfig::stage_section(Stage s) const {
  switch (s) {
    case Stage::Pre: {
      nlohmann::json pool;
      if (article_pool) {
        pool = *article_pool;
      } else {
        pool = pool_from_catalog ? "catalog" : "impressions";
      }
      return {{"inputs",
               {{"items", path_hash(corpus.items)},
                {"history", path_hash(corpus.history)},
                {"impressions", path_hash(corpus.impressions)},
                {"party_map", path_hash(corpus.party_map)}}},
              {"article_pool", pool},
              {"drop_cold_test_users", clean.drop_cold_test_users},
              {"split", split ? split->to_json() : nlohmann::json()}};
    }
    case Stage::In: {
      nlohmann::json ms = nlohmann::json::array();
      for (const auto& m : models) ms.push_back(effective_model(*this, m).to_json());
      return {{"models", ms}};
    }
    case Stage::Post: {
      nlohmann::json rs = nlohmann::json::array();
      for (const auto& r : rerankers) {
        auto j = r.to_json();
        j["ntd"] = r.ntd.to_json();
        rs.push_back(j);
      }
      return {{"rerankers", rs},
              {"list_size", list_size},
              {"behavior", behavior ? behavior->to_json() : nlohmann::json()}};
    }
    case Stage::Eval:
      return {{"ntd", ntd.to_json()},
              {"list_size", list_size},
              {"experiment_id", experiment_id},
              {"fragmentation_sample", metrics.fragmentation_sample},
              {"fragmentation_mode", metrics.fragmentation_mode == FragmentationMode::RecsVsRecs
                                         ? "recs_vs_recs"
                                         : "history_vs_recs"},
              {"alpha", metrics.alpha},
              {"seed", metrics.seed}};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Data preparation

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData d;
  auto raw = load_corpus(cfg.corpus.items, cfg.corpus.history, cfg.corpus.impressions,
                         cfg.corpus.party_map);
  auto [corpus, report] = clean_corpus(std::move(raw), cfg.clean);
  d.clean_report = report;
  if (cfg.pool_from_catalog) {
    for (const auto& [id, item] : corpus.items) d.pool.push_back(id);
  } else {
    d.pool = resolve_pool(corpus, cfg.article_pool);
  }
  if (cfg.split) {
    d.split = make_split(corpus, *cfg.split);
  } else {
    d.split.train_pairs = interaction_pairs(corpus);
    for (const auto& [u, i] : d.split.train_pairs) d.split.train_users.insert(u);
  }

  std::set<UserItem> train(d.split.train_pairs.begin(), d.split.train_pairs.end());
  for (auto& [user, events] : corpus.histories) {
    std::erase_if(events, [&](const HistoryEvent& e) {
      return !train.contains(UserItem{user, e.item_id});
    });
  }
  std::erase_if(corpus.histories, [](const auto& kv) { return kv.second.empty(); });

  std::set<std::string> users;
  for (const auto& im : corpus.impressions) users.insert(im.user_id);
  if (users.empty()) users = d.split.test_users;
  d.users.assign(users.begin(), users.end());
  if (d.users.empty()) throw ValidationError("no users to recommend for");
  if (train.empty()) throw ValidationError("no training interactions after the split");
  d.matrix = InteractionMatrix::from_pairs(d.split.train_pairs);
  d.corpus = std::move(corpus);
  return d;
}

// ---------------------------------------------------------------------------
// Manifest

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json stages_json = nlohmann::ordered_json::object();
  for (const auto& [stage, rec] : stages) {
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    for (const auto& [rel, hash] : rec.files) files[rel] = hash;
    stages_json[stage_name(stage)] = nlohmann::ordered_json{
        {"fingerprint", rec.fingerprint}, {"config", rec.config}, {"files", files}};
  }
  return nlohmann::ordered_json{{"stages", stages_json}};
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  Manifest m;
  try {
    for (const auto& [name, rec] : j.at("stages").items()) {
      auto stage = parse_stage(name);
      if (!stage) throw ValidationError("manifest: unknown stage '" + name + "'");
      StageRecord r;
      r.fingerprint = rec.at("fingerprint").get<std::string>();
      r.config = rec.at("config");
      r.files = rec.at("files").get<std::map<std::string, std::string>>();
      m.stages.emplace(*stage, std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  return m;
}

Manifest Manifest::load(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  if (!fs::exists(path)) return {};
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void Manifest::save(const fs::path& dir) const {
  write_file(dir / "manifest.json", to_json().dump(2) + "\n");
}

std::string fingerprint(const nlohmann::json& section) { return sha256_hex(section.dump()); }

void verify_prior_stages(const ExperimentConfig& cfg, const Manifest& manifest, Stage from) {
  for (auto s : kStages) {
    if (s >= from) break;
    auto it = manifest.stages.find(s);
    if (it == manifest.stages.end()) {
      throw ValidationError("stage '" + stage_name(s) + "' has no saved output in " +
                            cfg.output_dir.string() + "; run it first");
    }
    const auto section = cfg.stage_section(s);
    if (fingerprint(section) != it->second.fingerprint) {
      std::string keys;
      for (const auto& k : diff_keys(it->second.config, section)) {
        keys += keys.empty() ? k : ", " + k;
      }
      throw ValidationError("stage '" + stage_name(s) +
                            "': config fingerprint mismatch (changed: " + keys + ")");
    }
    for (const auto& [rel, hash] : it->second.files) {
      const auto path = cfg.output_dir / rel;
      if (!fs::exists(path)) {
        throw ValidationError("stage '" + stage_name(s) + "': missing output " + rel);
      }
      if (sha256_file(path) != hash) {
        throw ValidationError("stage '" + stage_name(s) + "': hash mismatch for " + rel);
      }
    }
  }
}

std::string recommendations_file(const std::string& model, const std::string& reranker) {
  return "recommendations/" + model + "_" + reranker + ".jsonl";
}

// ---------------------------------------------------------------------------
// Stages

namespace {

void run_pre(const ExperimentConfig& cfg, const PreparedData& d, StageWriter& out) {
  out.write("item_pool.jsonl", items_to_jsonl(d.corpus.items, d.pool));
  std::string train = "user_id,item_id\n";
  for (const auto& [u, i] : d.split.train_pairs) train += u + "," + i + "\n";
  std::string test = "user_id,item_id\n";
  for (const auto& [u, i] : d.split.test_pairs) test += u + "," + i + "\n";
  out.write("split/train.csv", train);
  out.write("split/test.csv", test);
  (void)cfg;
}

void run_in(const ExperimentConfig& cfg, const PreparedData& d, StageWriter& out,
            std::vector<std::string>& warnings) {
  ModelContext ctx{&d.matrix, &d.corpus.items, d.pool};
  const auto shown = impression_items(d.corpus);
  for (const auto& m : cfg.models) {
    const auto mc = effective_model(cfg, m);
    auto outputs = recommend_batch(ctx, d.users, mc);
    std::vector<RankedList> lists;
    for (auto& o : outputs) {
      warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
      lists.push_back(std::move(o.list));
    }
    out.write("candidates/" + m.name + ".jsonl", ranked_lists_to_jsonl(lists));

    std::vector<RankedList> scores(d.users.size());
    parallel_for(d.users.size(), [&](std::size_t k) {
      const auto& user = d.users[k];
      scores[k].user_id = user;
      auto it = shown.find(user);
      if (it == shown.end()) return;
      const auto s = score_items(ctx, user, mc, it->second);
      for (const auto& id : it->second) scores[k].entries.push_back({id, s.at(id)});
    });
    out.write("scores/" + m.name + ".jsonl", ranked_lists_to_jsonl(scores));
  }
}

void run_post(const ExperimentConfig& cfg, const PreparedData& d, StageWriter& out,
              std::vector<std::string>& warnings) {
  std::vector<RerankConfig> rerankers = cfg.rerankers;
  if (rerankers.empty()) {
    RerankConfig none;
    none.name = "none";
    none.list_size = cfg.list_size;
    none.ntd = cfg.ntd;
    rerankers.push_back(none);
  }
  RerankConfig fallback;
  const auto& dap = simulation_dap(cfg, fallback);
  for (const auto& m : cfg.models) {
    const auto cands = read_ranked_lists(cfg.output_dir / ("candidates/" + m.name + ".jsonl"));
    for (const auto& r : rerankers) {
      std::vector<RankedList> lists(cands.size());
      parallel_for(cands.size(), [&](std::size_t k) {
        lists[k] = cands[k].entries.empty() ? RankedList{cands[k].user_id, {}}
                                            : rerank(cands[k], d.corpus.items, r);
      });
      for (const auto& l : lists) {
        if (l.entries.size() < r.list_size) {
          warnings.push_back(r.name + ": user '" + l.user_id + "' got " +
                             std::to_string(l.entries.size()) + " of " +
                             std::to_string(r.list_size) + " items");
        }
      }
      out.write(recommendations_file(m.name, r.name), ranked_lists_to_jsonl(lists));
    }
    if (cfg.behavior) {
      std::vector<std::string> logs(cands.size());
      parallel_for(cands.size(), [&](std::size_t k) {
        std::vector<std::string> history;
        if (auto it = d.corpus.histories.find(cands[k].user_id); it != d.corpus.histories.end()) {
          for (const auto& e : it->second) history.push_back(e.item_id);
        }
        const auto profile = build_profile(history, d.corpus.items);
        logs[k] = run_simulation(cands[k], d.corpus.items, profile, dap, *cfg.behavior).to_jsonl();
      });
      std::string all;
      for (const auto& l : logs) all += l;
      out.write("simlogs/" + m.name + ".jsonl", all);
    }
  }
}

void run_eval(const ExperimentConfig& cfg, const PreparedData& d, StageWriter& out) {
  std::vector<std::string> rerankers;
  for (const auto& r : cfg.rerankers) rerankers.push_back(r.name);
  if (rerankers.empty()) rerankers.push_back("none");

  const auto ctx = EvalContext::build(d.corpus, d.pool, cfg.ntd);
  nlohmann::json report;
  report["experiment_id"] = cfg.experiment_id;
  report["list_size"] = cfg.list_size;
  report["ntv"] = table_json(ntv(cfg.ntd, cfg.list_size, cfg.ntv_targets));
  report["rows"] = nlohmann::json::array();
  for (const auto& m : cfg.models) {
    Predictions predictions;
    for (auto& l : read_ranked_lists(cfg.output_dir / ("scores/" + m.name + ".jsonl"))) {
      auto& s = predictions[l.user_id];
      for (const auto& e : l.entries) s[e.id] = e.score;
    }
    for (const auto& r : rerankers) {
      Recommendations recs;
      for (const auto& l : read_ranked_lists(cfg.output_dir / recommendations_file(m.name, r))) {
        recs[l.user_id] = l.ids();
      }
      const auto mr = evaluate(ctx, recs, &predictions, d.corpus.impressions, cfg.metrics);
      auto row = mr.to_json();
      row.erase("per_user");
      row["model"] = m.name;
      row["reranker"] = r;
      report["rows"].push_back(row);
    }
  }
  out.write("reports/report.json", report.dump(2) + "\n");
  out.write("reports/report.csv", report_csv(report));
}

}  // namespace

SaveState run(const ExperimentConfig& cfg, Stage from, Stage to) {
  SaveState state;
  state.dir = cfg.output_dir;
  state.manifest = Manifest::load(cfg.output_dir);
  verify_prior_stages(cfg, state.manifest, from);

  const auto data = prepare_data(cfg);
  for (auto s : kStages) {
    if (s < from || s > to) continue;
    for (auto later : kStages) {
      if (later >= s) state.manifest.stages.erase(later);
    }
    StageRecord rec;
    rec.config = cfg.stage_section(s);
    rec.fingerprint = fingerprint(rec.config);
    StageWriter out(cfg.output_dir, rec);
    switch (s) {
      case Stage::Pre: run_pre(cfg, data, out); break;
      case Stage::In: run_in(cfg, data, out, state.warnings); break;
      case Stage::Post: run_post(cfg, data, out, state.warnings); break;
      case Stage::Eval: run_eval(cfg, data, out); break;
    }
    state.manifest.stages[s] = std::move(rec);
    state.manifest.save(cfg.output_dir);
  }
  return state;
}

// ---------------------------------------------------------------------------
// Export and reporting

nlohmann::ordered_json export_jrex(const std::vector<RankedList>& recommendations,
                                   const std::string& experiment_id, const std::string& style) {
  nlohmann::ordered_json doc;
  doc["experimentId"] = experiment_id;
  doc["style"] = style;
  doc["users"] = nlohmann::ordered_json::array();
  for (const auto& list : recommendations) {
    nlohmann::ordered_json user;
    user["userId"] = list.user_id;
    user["items"] = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      user["items"].push_back(nlohmann::ordered_json{
          {"itemId", list.entries[r].id}, {"rank", r + 1}, {"score", list.entries[r].score}});
    }
    doc["users"].push_back(std::move(user));
  }
  return doc;
}

std::vector<RankedList> parse_jrex(const nlohmann::json& doc) {
  std::vector<RankedList> out;
  try {
    for (const auto& u : doc.at("users")) {
      RankedList list;
      list.user_id = u.at("userId").get<std::string>();
      std::vector<std::pair<std::size_t, ScoredItem>> ranked;
      for (const auto& i : u.at("items")) {
        ranked.push_back({i.at("rank").get<std::size_t>(),
                          {i.at("itemId").get<std::string>(), i.at("score").get<double>()}});
      }
      std::sort(ranked.begin(), ranked.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t r = 0; r < ranked.size(); ++r) {
        if (ranked[r].first != r + 1) {
          throw ValidationError("jrex: ranks of user '" + list.user_id + "' are not 1..n");
        }
        list.entries.push_back(std::move(ranked[r].second));
      }
      out.push_back(std::move(list));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("jrex: ") + e.what());
  }
  return out;
}

std::string report_csv(const nlohmann::json& report, int precision) {
  std::string out = table_header_csv() + "\n";
  out += table_row_csv("ntv", "", table_from_json(report.at("ntv")), precision) + "\n";
  for (const auto& row : report.at("rows")) {
    out += table_row_csv(row.at("model").get<std::string>(),
                         row.at("reranker").get<std::string>(), table_from_json(row.at("table")),
                         precision) +
           "\n";
  }
  return out;
}

}  // namespace nrs
