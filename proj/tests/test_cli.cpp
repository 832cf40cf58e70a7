#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dory/bench.hpp"
#include "support/fixture.hpp"

using dory::backend::Gateway;

namespace {

const std::string kCli = DORY_CLI_PATH;
const std::filesystem::path kAssetDir = DORY_ASSET_DIR;

int run_cli(const std::string& args) {
  const std::string command = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// dataset + cassette covering default-config runs of every subcommand
struct CliFixture {
  std::filesystem::path dir;
  std::filesystem::path prompts_file;
  std::filesystem::path records_file;
  std::filesystem::path cassette_file;

  explicit CliFixture(std::size_t n, const std::string& tag, bool all_subcommands = false) {
    dir = fixture::scratch_dir(tag);
    prompts_file = dir / "prompts.jsonl";
    records_file = dir / "records.jsonl";
    cassette_file = dir / "cassette.jsonl";
    const auto world = fixture::FixtureWorld::standard(n);
    const auto records = world.output_records();
    dory::bench::save_dataset(world.prompt_records(), prompts_file);
    dory::bench::save_dataset(records, records_file);
    dory::bench::ExperimentConfig config;
    config.asset_dir = kAssetDir;
    fixture::record_cassette(world, cassette_file, [&](const Gateway& gateway) {
      dory::bench::generate_outputs(world.prompt_records(), config, gateway);
      dory::bench::run_experiment(records, config, gateway);
      if (all_subcommands) {
        dory::bench::ablation(records, config, gateway);
        dory::bench::threshold_sweep(records, config, gateway,
                                     dory::bench::default_sweep_values());
      }
    });
  }

  std::string common_args() const {
    return " --cassette " + cassette_file.string() + " --assets " + kAssetDir.string();
  }
};

}  // namespace

TEST_CASE("recover runs a fixture end to end") {
  CliFixture fix(2, "cli_recover");
  const auto out = fix.dir / "out";
  const int code = run_cli("recover --input " + fix.records_file.string() + " --cassette " +
                           fix.cassette_file.string() + " --assets " + kAssetDir.string() +
                           " --out " + out.string());
  CHECK(code == 0);
  CHECK(std::filesystem::exists(out / "report.json"));
  CHECK(std::filesystem::exists(out / "report.txt"));

  const auto j = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(j.at("methods").contains("dory"));
  CHECK(j.at("failures") == 0);
}

TEST_CASE("gen-outputs, ablate and sweep run from the same cassette") {
  CliFixture fix(2, "cli_all", /*all_subcommands=*/true);

  const auto gen_out = fix.dir / "gen";
  CHECK(run_cli("gen-outputs --input " + fix.prompts_file.string() + fix.common_args() +
                " --out " + gen_out.string()) == 0);
  REQUIRE(std::filesystem::exists(gen_out / "outputs.jsonl"));
  const auto generated = dory::bench::load_dataset(gen_out / "outputs.jsonl");
  REQUIRE(generated.size() == 2);
  CHECK(generated[0].output.has_value());

  // the generated records feed the pipeline directly
  const auto rec_out = fix.dir / "rec";
  CHECK(run_cli("recover --input " + (gen_out / "outputs.jsonl").string() + fix.common_args() +
                " --out " + rec_out.string()) == 0);

  const auto abl_out = fix.dir / "abl";
  CHECK(run_cli("ablate --input " + fix.records_file.string() + fix.common_args() + " --out " +
                abl_out.string()) == 0);
  const auto abl = nlohmann::json::parse(slurp(abl_out / "report.json"));
  REQUIRE(abl.at("ablation").size() == 3);
  CHECK(abl.at("ablation").at(0).at("label") == "w/o hint");

  const auto sweep_out = fix.dir / "sweep";
  CHECK(run_cli("sweep --input " + fix.records_file.string() + fix.common_args() + " --out " +
                sweep_out.string()) == 0);
  const auto sweep = nlohmann::json::parse(slurp(sweep_out / "report.json"));
  REQUIRE(sweep.at("sweep").at("alpha").size() == 7);
  REQUIRE(sweep.at("sweep").at("beta").size() == 7);
}

TEST_CASE("correlate surfaces degenerate fixtures as a runtime failure") {
  // every record recovers perfectly, so scores are constant and the
  // correlation is undefined; the CLI reports that as exit 1, not a crash
  CliFixture fix(3, "cli_correlate");
  const auto out = fix.dir / "corr";
  CHECK(run_cli("correlate --input " + fix.records_file.string() + fix.common_args() +
                " --out " + out.string()) == 1);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli("recover --input x.jsonl --definitely-not-a-flag") == 2);
  CHECK(run_cli("eval") == 2);            // --input is required
  CHECK(run_cli("not-a-subcommand") == 2);
  CHECK(run_cli("") == 2);                // a subcommand is required
}

TEST_CASE("cassette inspection and verification") {
  CliFixture fix(1, "cli_cassette");
  CHECK(run_cli("cassette --cassette " + fix.cassette_file.string()) == 0);
  CHECK(run_cli("cassette --cassette " + fix.cassette_file.string() + " --verify") == 0);
}

TEST_CASE("missing cassette entries surface as a nonzero exit") {
  CliFixture fix(1, "cli_miss");
  // a second record that the cassette has never seen
  auto records = dory::bench::load_dataset(fix.records_file);
  records.push_back({"extra", std::string("an unrecorded prompt"), std::nullopt, ""});
  const auto bigger = fix.dir / "bigger.jsonl";
  dory::bench::save_dataset(records, bigger);
  const auto out = fix.dir / "out_miss";
  const int code = run_cli("recover --input " + bigger.string() + " --cassette " +
                           fix.cassette_file.string() + " --assets " + kAssetDir.string() +
                           " --out " + out.string());
  CHECK(code == 1);  // per-record failure surfaced in the report
}
