// Parallel kernels against their serial references on the synthetic corpus.
#include <benchmark/benchmark.h>

#include "nrs/metrics.hpp"
#include "nrs/models.hpp"
#include "nrs/synthetic.hpp"

using namespace nrs;

namespace {

struct Fixture {
  Corpus corpus;
  InteractionMatrix matrix;
  ModelContext ctx;
  std::vector<std::string> users;
  EvalContext eval;
  Recommendations recs;

  explicit Fixture(std::size_t users_count) {
    SyntheticOptions opts;
    opts.users = users_count;
    corpus = make_synthetic(opts);
    matrix = build_matrix(corpus);
    ctx = {&matrix, &corpus.items, resolve_pool(corpus, std::nullopt)};
    for (const auto& [u, h] : corpus.histories) users.push_back(u);
    eval = EvalContext::build(corpus, ctx.pool, default_ntd());
    for (const auto& out : recommend_batch(ctx, users, model(ModelKind::RP3Beta))) {
      recs[out.list.user_id] = out.list.ids();
    }
  }

  static ModelConfig model(ModelKind kind) {
    ModelConfig c;
    c.kind = kind;
    c.name = std::string(to_string(kind));
    c.hops = kind == ModelKind::DRDW ? 5 : 3;
    if (c.needs_ntd()) c.ntd = default_ntd();
    return c;
  }
};

const Fixture& fixture(std::size_t users) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(users);
  if (it == cache.end()) it = cache.emplace(users, users).first;
  return it->second;
}

template <bool Parallel>
void BM_Recommend(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto cfg = Fixture::model(static_cast<ModelKind>(state.range(1)));
  for (auto _ : state) {
    auto out = Parallel ? recommend_batch(f.ctx, f.users, cfg)
                        : recommend_batch_serial(f.ctx, f.users, cfg);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.users.size()));
}

template <bool Parallel>
void BM_Evaluate(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  EvalOptions opts;
  for (auto _ : state) {
    auto r = Parallel ? evaluate(f.eval, f.recs, nullptr, f.corpus.impressions, opts)
                      : evaluate_serial(f.eval, f.recs, nullptr, f.corpus.impressions, opts);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.users.size()));
}

void model_args(benchmark::internal::Benchmark* b) {
  for (auto kind : {ModelKind::RP3Beta, ModelKind::RWE, ModelKind::DRDW}) {
    for (std::int64_t users : {50, 200}) b->Args({users, static_cast<std::int64_t>(kind)});
  }
}

}  // namespace

BENCHMARK(BM_Recommend<true>)->Name("recommend/parallel")->Apply(model_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Recommend<false>)->Name("recommend/serial")->Apply(model_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate<true>)->Name("evaluate/parallel")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Evaluate<false>)->Name("evaluate/serial")->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
