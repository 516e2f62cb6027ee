#include "sumforge/rng.hpp"
#include "sumforge/rouge.hpp"

#include <benchmark/benchmark.h>

using namespace sumforge;

namespace {

TokenSeq random_seq(Engine& rng, std::size_t len, std::size_t alphabet) {
  TokenSeq t(len);
  for (auto& x : t) x = "w" + std::to_string(uniform_below(rng, alphabet));
  return t;
}

void BM_RougeN(benchmark::State& state) {
  Engine rng(1);
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto a = random_seq(rng, len, 50), b = random_seq(rng, len, 50);
  for (auto _ : state) benchmark::DoNotOptimize(rouge_n(a, b, 2));
}
BENCHMARK(BM_RougeN)->Arg(16)->Arg(64)->Arg(256);

void BM_RougeL(benchmark::State& state) {
  Engine rng(2);
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto a = random_seq(rng, len, 50), b = random_seq(rng, len, 50);
  for (auto _ : state) benchmark::DoNotOptimize(rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->Arg(16)->Arg(64)->Arg(256);

void BM_Tokenize(benchmark::State& state) {
  const std::string text =
      "The council said on Monday that river levels, already high, would rise further after heavy rain.";
  const Tokenizer tok;
  for (auto _ : state) benchmark::DoNotOptimize(tok.tokenize(text));
}
BENCHMARK(BM_Tokenize);

}  // namespace
