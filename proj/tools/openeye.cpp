#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "openeye/codec.hpp"
#include "openeye/config.hpp"
#include "openeye/events.hpp"
#include "openeye/extractor.hpp"
#include "openeye/fixtures.hpp"
#include "openeye/http_server.hpp"
#include "openeye/service.hpp"
#include "openeye/simulate.hpp"

namespace fs = std::filesystem;
using namespace openeye;
using nlohmann::json;

namespace {

tutorial::CourseManifest courses_for(const service::ServiceConfig& config) {
  if (config.course_manifest.empty())
    return tutorial::parse_courses(service::default_course_manifest(), config.exhibits_dir());
  return tutorial::load_courses(config.course_manifest, config.exhibits_dir());
}

service::ServiceOptions options_for(const service::ServiceConfig& config,
                                    const pupil::PupilExtractor* extractor) {
  service::ServiceOptions options;
  options.test_size = config.test_size;
  options.dilation = config.biou_dilation;
  options.extractor = extractor;
  options.exhibit_dir = config.exhibits_dir();
  if (const char* token = std::getenv("OPENEYE_ADMIN_TOKEN")) options.admin_token = token;
  return options;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"openeye: pupil-shape forensics and a three-stage perception study service"};
  app.require_subcommand(1);
  const pupil::ThresholdExtractor extractor;

  std::string config_path;
  int port = 8080;
  std::string host = "0.0.0.0";
  auto* serve = app.add_subcommand("serve", "Run the study HTTP service");
  serve->add_option("--config", config_path, "Deployment config file")->required();
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--host", host, "Listen address");

  std::string manifest_path;
  auto* ingest = app.add_subcommand("ingest", "Ingest a labeled image manifest into the pool");
  ingest->add_option("--manifest", manifest_path, "JSON Lines manifest")->required();
  ingest->add_option("--config", config_path,
                     "Deployment config; without it the manifest is only validated");

  std::string out_path;
  int dilation = pupil::kDefaultDilation;
  auto* analyze = app.add_subcommand("analyze", "Batch pupil scoring to JSON Lines");
  analyze->add_option("--manifest", manifest_path, "JSON Lines manifest")->required();
  analyze->add_option("--out", out_path, "Output JSON Lines file")->required();
  analyze->add_option("--dilation", dilation, "Boundary IoU dilation in pixels")->check(CLI::NonNegativeNumber);

  auto* exporter = app.add_subcommand("export", "Export completed sessions as JSON Lines");
  exporter->add_option("--out", out_path, "Output JSON Lines file")->required();
  exporter->add_option("--config", config_path, "Deployment config file")->required();

  std::size_t sessions = 10;
  std::optional<double> tau;
  std::uint64_t seed = 1;
  auto* simulate = app.add_subcommand("simulate", "Run simulated participants end to end");
  simulate->add_option("--sessions", sessions, "Number of sessions")->check(CLI::PositiveNumber);
  simulate->add_option("--tau", tau, "Decision threshold on the face score");
  simulate->add_option("--seed", seed, "Run seed");
  auto* sim_config = simulate->add_option("--config", config_path, "Use the deployment's ingested pool");
  simulate->add_option("--manifest", manifest_path, "Use a manifest ingested in memory")->excludes(sim_config);

  std::size_t n_real = 50, n_fake = 50;
  std::uint64_t fixture_seed = 7;
  auto* fixtures = app.add_subcommand("fixtures", "Write the synthetic fixture corpus");
  fixtures->add_option("--out", out_path, "Output directory")->required();
  fixtures->add_option("--real", n_real, "Number of real faces");
  fixtures->add_option("--fake", n_fake, "Number of fake faces");
  fixtures->add_option("--seed", fixture_seed, "Corpus seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      const auto config = service::load_config(config_path);
      auto pool = std::make_shared<const ImagePool>(ImagePool::load(config.data_dir));
      service::FileEventStore store(config.events_dir());
      service::StudyService svc(options_for(config, &extractor), pool, courses_for(config), store);
      const std::size_t recovered = svc.recover();
      service::HttpServer server(svc);
      std::cerr << "openeye: " << pool->size() << " images, " << recovered
                << " sessions recovered, listening on " << host << ":" << port << "\n";
      if (!server.listen(host, port)) {
        std::cerr << "openeye: cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }

    if (*ingest) {
      std::optional<service::ServiceConfig> config;
      if (!config_path.empty()) config = service::load_config(config_path);
      ImagePool pool = config ? ImagePool::load(config->data_dir) : ImagePool();
      IngestOptions opts;
      opts.extractor = &extractor;
      if (config) opts.dilation = config->biou_dilation;
      const auto report = ingest_manifest(manifest_path, pool, opts);
      if (config) pool.save();
      json out = codec::ingest_report_json(report);
      out["validation"] = codec::validation_json(
          validate_pool(pool, config ? config->test_size : study::kDefaultTestSize));
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*analyze) {
      ImagePool pool;
      IngestOptions opts;
      opts.extractor = &extractor;
      opts.dilation = dilation;
      const auto report = ingest_manifest(manifest_path, pool, opts);
      std::string lines;
      for (const auto& [id, entry] : pool.entries()) {
        std::optional<pupil::PupilScore> left, right;
        for (const auto& a : entry.annotations)
          (a.side == pupil::Side::Left ? left : right) = pupil::PupilScore{a.fitted, a.biou};
        std::optional<double> aggregate;
        if (left || right)
          aggregate = pupil::combine_eyes(id, left ? std::optional(left->biou) : std::nullopt,
                                          right ? std::optional(right->biou) : std::nullopt)
                          .aggregate;
        lines += codec::face_score_json(id, left, right, aggregate).dump() + "\n";
      }
      write_text(out_path, lines);
      std::cerr << "openeye: scored " << pool.size() << " images, " << report.errors.size()
                << " manifest errors\n";
      for (const auto& e : report.errors)
        std::cerr << "  line " << e.line << " " << e.path << ": " << to_string(e.code) << " " << e.detail << "\n";
      return 0;
    }

    if (*exporter) {
      const auto config = service::load_config(config_path);
      auto pool = std::make_shared<const ImagePool>(ImagePool::load(config.data_dir));
      service::FileEventStore store(config.events_dir());
      service::StudyService svc(options_for(config, &extractor), pool, courses_for(config), store);
      svc.recover();
      write_text(out_path, svc.export_jsonl());
      return 0;
    }

    if (*simulate) {
      service::ServiceConfig config;
      std::shared_ptr<const ImagePool> pool;
      std::optional<fs::path> scratch;
      if (!config_path.empty()) {
        config = service::load_config(config_path);
        pool = std::make_shared<const ImagePool>(ImagePool::load(config.data_dir));
      } else if (!manifest_path.empty()) {
        scratch = fs::temp_directory_path() / ("openeye-sim-" + service::random_session_id());
        config.data_dir = *scratch;
        ImagePool p;
        IngestOptions opts;
        opts.extractor = &extractor;
        opts.exhibit_dir = config.exhibits_dir();
        const auto report = ingest_manifest(manifest_path, p, opts);
        if (!report.errors.empty())
          std::cerr << "openeye: " << report.errors.size() << " manifest entries rejected\n";
        pool = std::make_shared<const ImagePool>(std::move(p));
      } else {
        std::cerr << "openeye simulate: pass --config or --manifest\n" << simulate->help();
        return 2;
      }
      service::MemoryEventStore store;
      service::StudyService svc(options_for(config, &extractor), pool, courses_for(config), store);
      const service::SimulationOptions sim{sessions, tau.value_or(config.tau), seed};
      const auto result = service::run_simulation(svc, pupil::face_scores_from_pool(*pool), sim);
      if (scratch) fs::remove_all(*scratch);

      json per_session = json::array();
      for (const auto& s : result.sessions)
        per_session.push_back({{"session_id", s.session_id},
                               {"stage1_accuracy", s.report.stage1.accuracy},
                               {"stage3_accuracy", s.report.stage3.accuracy},
                               {"delta_accuracy", s.report.deltas.accuracy}});
      std::cout << json{{"tau", sim.tau}, {"seed", seed}, {"sessions", per_session},
                        {"aggregate", service::aggregate_json(result.aggregate)}}
                       .dump(2)
                << "\n";
      return 0;
    }

    if (*fixtures) {
      fixtures::CorpusOptions opts;
      opts.n_real = n_real;
      opts.n_fake = n_fake;
      opts.seed = fixture_seed;
      const auto corpus = fixtures::generate_corpus(out_path, opts);
      std::printf("wrote %zu faces to %s\ncalibrated tau = %.17g\n", n_real + n_fake,
                  out_path.c_str(), corpus.tau);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "openeye: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "openeye: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
