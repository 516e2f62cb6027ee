// Stand-in trainer for the stage contract:
//   mock_trainer --manifest <path> --init <ckpt|pretrained> --out <dir>
// Writes <out>/checkpoint.digest derived from the manifest bytes and the
// init checkpoint. Environment knobs:
//   MOCK_TRAINER_FAIL_STAGE=<stage>  exit 3 when the manifest's stage matches
//   MOCK_TRAINER_NO_DIGEST=1         exit 0 without writing a digest
//   MOCK_TRAINER_LOG=<file>          append "<stage> <init>" per invocation
#include "sumforge/digest.hpp"
#include "sumforge/jsonl.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  std::string manifest, init, out;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--manifest") manifest = argv[i + 1];
    else if (flag == "--init") init = argv[i + 1];
    else if (flag == "--out") out = argv[i + 1];
  }
  if (manifest.empty() || init.empty() || out.empty()) {
    std::cerr << "{\"error\":\"usage\"}\n";
    return 2;
  }
  const auto obj = sumforge::read_json(manifest);
  const std::string stage = obj.at("stage").get<std::string>();

  for (const auto& file : obj.at("data_files")) {
    if (!std::filesystem::exists(std::filesystem::path(manifest).parent_path() / file.get<std::string>())) {
      std::cerr << "{\"error\":\"missing data file\"}\n";
      return 5;
    }
  }

  if (const char* log = std::getenv("MOCK_TRAINER_LOG")) {
    std::ofstream(log, std::ios::app) << stage << " " << init << "\n";
  }
  if (const char* fail = std::getenv("MOCK_TRAINER_FAIL_STAGE"); fail != nullptr && stage == fail) {
    std::cerr << "{\"error\":\"requested failure\"}\n";
    return 3;
  }

  std::string init_digest = "pretrained";
  if (init != "pretrained") {
    std::ifstream in(std::filesystem::path(init) / "checkpoint.digest");
    if (!(in >> init_digest)) {
      std::cerr << "{\"error\":\"init checkpoint unreadable\"}\n";
      return 4;
    }
  }
  if (std::getenv("MOCK_TRAINER_NO_DIGEST") != nullptr) return 0;

  std::filesystem::create_directories(out);
  const std::string digest = sumforge::sha256_hex(sumforge::read_text_file(manifest) + "\n" + init_digest);
  std::ofstream(std::filesystem::path(out) / "weights.bin") << digest;
  std::ofstream(std::filesystem::path(out) / "checkpoint.digest") << digest << "\n";
  return 0;
}
