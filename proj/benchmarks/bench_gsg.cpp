#include "sumforge/gsg.hpp"
#include "sumforge/rng.hpp"

#include <benchmark/benchmark.h>

#include <cctype>

using namespace sumforge;

namespace {

std::vector<DocInput> synthetic_corpus(std::size_t n, std::size_t sentences) {
  static const std::vector<std::string> vocab = {"the", "council", "said", "river", "levels", "would",
                                                 "rise", "after", "heavy", "rain", "residents", "were",
                                                 "told", "to", "prepare", "for", "flooding", "monday"};
  Engine rng(5);
  std::vector<DocInput> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
      std::string sentence;
      for (std::size_t w = 0, len = 12 + uniform_below(rng, 14); w < len; ++w) {
        if (w) sentence += ' ';
        sentence += vocab[uniform_below(rng, vocab.size())];
      }
      sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
      text += sentence + ". ";
    }
    out[i] = {"d" + std::to_string(i), text};
  }
  return out;
}

void BM_ExtractCorpus(benchmark::State& state) {
  const auto corpus = synthetic_corpus(200, static_cast<std::size_t>(state.range(0)));
  const Tokenizer tok;
  for (auto _ : state) benchmark::DoNotOptimize(extract_corpus(corpus, tok, {}, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_ExtractCorpus)->Arg(4)->Arg(12)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace
