// lanecarto: scenario generation, map building, evaluation and export.
//
// Exit codes: 0 success (including builds that finish with warnings),
// 1 invalid input or usage, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "lanecarto/errors.hpp"
#include "lanecarto/evaluation.hpp"
#include "lanecarto/export.hpp"
#include "lanecarto/io.hpp"
#include "lanecarto/pipeline.hpp"
#include "lanecarto/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lanecarto;

namespace {

// LANECARTO_SEED beats whatever the config or scenario file says.
bool env_seed(std::uint64_t& seed) {
  const char* text = std::getenv("LANECARTO_SEED");
  if (text == nullptr || *text == '\0') return false;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(text, &end, 10);
  if (end == text || *end != '\0')
    throw ValidationError(std::string("LANECARTO_SEED is not an integer: ") + text);
  seed = value;
  return true;
}

int run_gen(const std::string& spec_path, const std::string& out_dir) {
  ScenarioSpec spec = parse_scenario_spec(read_text_file(spec_path));
  std::uint64_t seed = 0;
  if (env_seed(seed)) spec.seed = seed;

  const GroundTruthBundle bundle = generate(spec);
  write_bundle(bundle, out_dir);

  std::cout << "bundle written to " << out_dir << "\n";
  std::cout << "  skeleton.json  " << bundle.skeleton.edges.size() << " directed edges, "
            << bundle.skeleton.intersections.size() << " intersections\n";
  std::cout << "  bev.png        ground-truth raster\n";
  std::cout << "  truth.json     " << bundle.edges.size() << " edges, "
            << bundle.connections.size() << " connections\n";
  std::cout << "  poses.csv      " << bundle.poses.size() << " poses\n";
  std::cout << "  camera.txt     pinhole intrinsics + extrinsics\n";
  if (bundle.spec.emit_frames)
    std::cout << "  frames/, cloud_*.bin  " << bundle.frames.size()
              << " frames with point clouds\n";
  return 0;
}

int run_build(const std::string& config_path, std::string output) {
  PipelineConfig config = parse_pipeline_config(read_text_file(config_path));
  std::uint64_t seed = 0;
  if (env_seed(seed)) config.seed = seed;
  if (output.empty()) output = config.paths.output;
  if (output.empty())
    throw ValidationError("no output path: pass -o or set paths.output in the config");

  const HDMapDocument doc = cmd_build(config);
  write_text_file(output, map_document_to_json(doc));

  std::size_t lanes = 0;
  for (const HDMapDocument::DocRoad& road : doc.roads) lanes += road.lanes.size();
  std::cout << "map written to " << output << ": " << doc.roads.size() << " roads, "
            << lanes << " lanes, " << doc.intersections.size() << " intersections\n";
  for (const std::string& warning : doc.warnings)
    std::cerr << "warning: " << warning << "\n";
  return 0;
}

int run_eval(const std::string& map_path, const std::string& truth_path,
             const EvalOptions& options, const std::string& output) {
  const HDMapDocument doc = map_document_from_json(read_text_file(map_path));
  const TruthDocument truth = parse_truth_json(read_text_file(truth_path));
  const EvaluationReport report = cmd_eval(doc, truth, options);

  const std::string json = evaluation_report_to_json(report);
  if (output.empty()) {
    std::cout << json;
  } else {
    write_text_file(output, json);
    std::cout << "report written to " << output << "\n";
  }
  const bool ok = report.passes(options.gate.min_iou, options.gate.max_rms);
  std::cout << "gate " << (ok ? "PASS" : "FAIL") << " (miou=" << report.miou_per_lane
            << ", rms=" << report.rms_mean << ", precision=" << report.precision
            << ", recall=" << report.recall << ")\n";
  return 0;
}

int run_export(const std::string& map_path, const std::string& format,
               const std::string& output) {
  const HDMapDocument doc = map_document_from_json(read_text_file(map_path));
  write_text_file(output, export_document(doc, parse_export_format(format)));
  std::cout << "exported " << format << " to " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane-level HD map reconstruction toolkit"};
  app.require_subcommand(1);

  std::string gen_spec, gen_out;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic scenario bundle");
  gen->add_option("spec", gen_spec, "scenario spec JSON")->required();
  gen->add_option("-o,--output", gen_out, "bundle output directory")->required();

  std::string build_config, build_out;
  CLI::App* build = app.add_subcommand("build", "build a map from a sensor bundle");
  build->add_option("-c,--config", build_config, "pipeline config file")->required();
  build->add_option("-o,--output", build_out, "map document output path");

  std::string eval_map, eval_truth, eval_out;
  EvalOptions eval_options;
  CLI::App* eval = app.add_subcommand("eval", "score a map document against truth");
  eval->add_option("map", eval_map, "map document JSON")->required();
  eval->add_option("truth", eval_truth, "ground truth JSON")->required();
  eval->add_option("--gate-iou", eval_options.gate.min_iou, "per-lane IOU gate");
  eval->add_option("--gate-rms", eval_options.gate.max_rms, "center-line RMS gate (m)");
  eval->add_flag("--force", eval_options.force, "evaluate documents without provenance");
  bool no_rectify = false;
  eval->add_flag("--no-rectify", no_rectify, "skip global rigid rectification");
  eval->add_option("-o,--output", eval_out, "report output path (default: stdout)");

  std::string export_map, export_format, export_out;
  CLI::App* exp = app.add_subcommand("export", "convert a map document");
  exp->add_option("map", export_map, "map document JSON")->required();
  exp->add_option("--format", export_format, "geojson | lanelet-json | svg")->required();
  exp->add_option("-o,--output", export_out, "output file")->required();

  try {
    app.parse(argc, argv);
    if (*gen) return run_gen(gen_spec, gen_out);
    if (*build) return run_build(build_config, build_out);
    if (*eval) {
      eval_options.rectify = !no_rectify;
      return run_eval(eval_map, eval_truth, eval_options, eval_out);
    }
    if (*exp) return run_export(export_map, export_format, export_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
