// lomo_cli: scene generation, the individual detector stages, evaluation,
// the end-to-end run and SVG rendering.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 I/O failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "lomo/error.hpp"
#include "lomo/irm.hpp"
#include "lomo/json_io.hpp"
#include "lomo/pipeline.hpp"
#include "lomo/raster.hpp"
#include "lomo/sem.hpp"
#include "lomo/svg.hpp"

namespace fs = std::filesystem;
using lomo::json_io::json;
using namespace lomo;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void create_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string rmap_name(const char* stem, int i) { return std::string(stem) + "_" + std::to_string(i) + ".rmap"; }

struct Options {
  pipeline::PipelineConfig config;
  pipeline::SceneSpec spec;
  std::string dr_mode = "perfect";
  int scenes = 1;

  std::string out;
  std::string maps;
  std::string scene;
  std::string proposals;
  std::string quad;
  std::string pred;
  std::string gt;
  std::string report;
  int index = 0;
};

void add_config_options(CLI::App& app, Options& o) {
  auto& c = o.config;
  auto& s = o.spec;
  app.add_option("--seed", c.seed, "Random seed of scenes and oracle noise");
  app.add_option("--downsample", c.downsample, "Stride of DR and SEM label maps");
  app.add_option("--shrink-ratio", c.shrink_ratio, "Shrink ratio of positive DR regions");
  app.add_option("--l", c.l, "Normalizer of the scale-invariant weights");
  app.add_option("--dr-score-thresh", c.dr_score_thresh, "DR score threshold for decoding");
  app.add_option("--dr-mode", o.dr_mode, "DR oracle: perfect, noisy or truncated")
      ->check(CLI::IsMember({"perfect", "noisy", "truncated"}));
  app.add_option("--dr-noise", c.dr_noise, "Std. dev. (px) of DR offset noise");
  app.add_option("--dr-receptive-field", c.dr_receptive_field,
                 "Longest text extent (px) a truncated DR proposal covers");
  app.add_option("--top-k", c.top_k, "Proposals kept after NMS");
  app.add_option("--nms-iou", c.nms_iou, "NMS suppression IoU");
  app.add_option("--rt", c.rt, "Refinement iterations");
  app.add_option("--irm-fraction", c.irm_fraction,
                 "Fraction of the corner error the IRM oracle corrects per step");
  app.add_option("--irm-roi-h", c.irm_roi_h, "IRM RoI block height");
  app.add_option("--irm-roi-w", c.irm_roi_w, "IRM RoI block width");
  app.add_option("--attention-sigma", c.attention_sigma, "Corner attention spread (cells)");
  app.add_option("--sem", c.sem_enabled, "Reconstruct polygons with the shape expression module");
  app.add_option("--n", c.n, "Center-line sample points");
  app.add_option("--score-thresh", c.score_thresh, "Polygon score threshold");
  app.add_option("--line-shrink", c.line_shrink, "Center-line end shrink fraction");
  app.add_option("--tcl-thickness", c.tcl_thickness, "Center-line thickness fraction");
  app.add_option("--sem-noise", c.sem_noise, "Std. dev. (px) of SEM border-offset noise");
  app.add_option("--sem-roi-h", c.sem_roi_h, "SEM RoI block height");
  app.add_option("--sem-roi-w", c.sem_roi_w, "SEM RoI block width");
  app.add_option("--eval-iou", c.eval_iou, "Evaluation IoU thresholds");
  app.add_option("--threads", c.threads, "Worker threads (0: all cores)");

  app.add_option("--scenes", o.scenes, "Number of scenes");
  app.add_option("--width", s.width, "Canvas width");
  app.add_option("--height", s.height, "Canvas height");
  app.add_option("--straight", s.straight, "Straight instances per scene");
  app.add_option("--long", s.long_text, "Long instances per scene");
  app.add_option("--curved", s.curved, "Curved instances per scene");
  app.add_option("--wavy", s.wavy, "Wavy instances per scene");
  app.add_option("--min-thickness", s.min_thickness, "Smallest text thickness (px)");
  app.add_option("--max-thickness", s.max_thickness, "Largest text thickness (px)");
}

int cmd_gen(Options& o) {
  if (o.out.empty()) throw ValidationError("gen needs --out");
  const auto corpus = pipeline::make_corpus(o.config.seed, 1, o.spec, o.config);
  const auto& g = corpus.front();
  const fs::path root(o.out);
  create_dirs(root / "dr");
  json_io::write_json_file(root / "scene.json", pipeline::to_json(g.scene));
  save_rmap(root / "dr" / "score.rmap", g.dr.score);
  save_rmap(root / "dr" / "weight.rmap", g.dr.weight);
  for (int i = 0; i < 8; ++i)
    save_rmap(root / "dr" / rmap_name("offset", i), g.dr.offsets[static_cast<std::size_t>(i)]);
  for (std::size_t k = 0; k < g.sem.size(); ++k) {
    const fs::path dir = root / "sem" / std::to_string(k);
    create_dirs(dir);
    save_rmap(dir / "tr.rmap", g.sem[k].text_region);
    save_rmap(dir / "tcl.rmap", g.sem[k].center_line);
    for (int i = 0; i < 4; ++i)
      save_rmap(dir / rmap_name("border", i), g.sem[k].border_offsets[static_cast<std::size_t>(i)]);
  }
  std::cout << "scene " << g.scene.seed << ": " << g.scene.instances.size() << " instances -> "
            << root.string() << "\n";
  return 0;
}

int cmd_decode(Options& o) {
  if (o.maps.empty()) throw ValidationError("decode needs --maps");
  const fs::path dir(o.maps);
  const RasterMap score = load_rmap(dir / "score.rmap");
  std::array<RasterMap, 8> offsets;
  for (int i = 0; i < 8; ++i) offsets[static_cast<std::size_t>(i)] = load_rmap(dir / rmap_name("offset", i));
  std::size_t degenerate = 0;
  const auto all = pipeline::decode_dr(score, offsets, o.config.dr_score_thresh, &degenerate);
  const auto kept = geom::nms(all, o.config.nms_iou, static_cast<std::size_t>(o.config.top_k));
  json props = json::array();
  for (const auto& p : kept) props.push_back(json_io::to_json(p));
  write_json(o.out, {{"proposals", props}, {"decoded", all.size()}, {"degenerate", degenerate}});
  return 0;
}

std::vector<geom::Proposal> read_proposals(const std::string& path) {
  const json j = json_io::read_json_file(path);
  const json& arr = j.is_object() ? j.at("proposals") : j;
  std::vector<geom::Proposal> out;
  for (const auto& p : arr) out.push_back(json_io::proposal_from_json(p));
  return out;
}

int cmd_refine(Options& o) {
  if (o.scene.empty() || o.proposals.empty()) throw ValidationError("refine needs --scene and --proposals");
  const auto scene = pipeline::scene_from_json(json_io::read_json_file(o.scene));
  const auto proposals = read_proposals(o.proposals);
  const auto shared = pipeline::make_shared_features(scene, o.config.downsample);
  const pipeline::AttentionOracle predictor(o.config.irm_fraction, o.config.downsample,
                                            o.config.irm_roi_h, o.config.irm_roi_w,
                                            o.config.attention_sigma);
  irm::RefineStats stats;
  const auto refined = irm::refine(proposals, predictor, shared, o.config.rt, &stats);
  json props = json::array();
  for (const auto& p : refined) props.push_back(json_io::to_json(p));
  write_json(o.out, {{"proposals", props}, {"degenerate_steps", stats.degenerate_steps}});
  return 0;
}

int cmd_reconstruct(Options& o) {
  if (o.maps.empty()) throw ValidationError("reconstruct needs --maps");
  const fs::path dir(o.maps);
  labelgen::SemMaps maps;
  maps.text_region = load_rmap(dir / "tr.rmap");
  maps.center_line = load_rmap(dir / "tcl.rmap");
  for (int i = 0; i < 4; ++i)
    maps.border_offsets[static_cast<std::size_t>(i)] = load_rmap(dir / rmap_name("border", i));
  const sem::ReconstructParams params{o.config.n, o.config.score_thresh, o.config.line_shrink, 0.5};
  std::optional<sem::Reconstruction> rec;
  if (o.quad.empty()) {
    rec = sem::reconstruct(maps, GridFrame::image_grid(maps.text_region.downsample()), params);
  } else {
    json j = json_io::read_json_file(o.quad);
    if (j.is_object()) j = j.at("vertices");
    rec = sem::reconstruct(json_io::quad_from_json(j), maps, params);
  }
  write_json(o.out, rec ? json_io::to_json(*rec) : json(nullptr));
  return 0;
}

int cmd_eval(Options& o) {
  if (o.pred.empty() || o.gt.empty()) throw ValidationError("eval needs --pred and --gt");
  const json pj = json_io::read_json_file(o.pred);
  const json gj = json_io::read_json_file(o.gt);
  if (!pj.is_array() || !gj.is_array() || pj.size() != gj.size())
    throw ValidationError("--pred and --gt must be arrays with one entry per image");
  std::vector<evalproto::MatchCounts> counts;
  std::vector<json> reports;
  json out = json::array();
  for (double thr : o.config.eval_iou) {
    counts.clear();
    for (std::size_t i = 0; i < pj.size(); ++i) {
      std::vector<evalproto::ScoredPolygon> preds;
      for (const auto& p : pj[i]) preds.push_back(json_io::scored_polygon_from_json(p));
      std::vector<geom::ArbPolygon> gts;
      for (const auto& g : gj[i]) gts.push_back(json_io::polygon_from_json(g));
      counts.push_back(evalproto::match_image(preds, gts, thr));
    }
    out.push_back(json_io::to_json(evalproto::aggregate(counts, thr)));
  }
  write_json(o.out, out);
  return 0;
}

int cmd_e2e(Options& o) {
  const auto corpus = pipeline::make_corpus(o.config.seed, o.scenes, o.spec, o.config);
  const auto report = pipeline::run_pipeline(corpus, o.config);
  write_json(o.out, pipeline::to_json(report));
  if (!o.out.empty() && o.out != "-") {
    for (const auto& r : report.reports)
      std::cout << "IoU@" << r.iou_threshold << ": P " << r.precision << " R " << r.recall
                << " H " << r.hmean << "\n";
  }
  return 0;
}

int cmd_render(Options& o) {
  if (o.scene.empty()) throw ValidationError("render needs --scene");
  const auto scene = pipeline::scene_from_json(json_io::read_json_file(o.scene));
  std::optional<pipeline::SceneResult> result;
  if (!o.report.empty()) {
    const json r = json_io::read_json_file(o.report);
    const json& scenes = r.at("scenes");
    if (o.index < 0 || static_cast<std::size_t>(o.index) >= scenes.size())
      throw ValidationError("--index out of range");
    result = pipeline::scene_result_from_json(scenes[static_cast<std::size_t>(o.index)]);
  }
  write_text(o.out, pipeline::render_svg(scene, result ? &*result : nullptr));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrangle and polygon text detection toolkit driven by oracle predictors"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value configuration file");
  Options o;
  add_config_options(app, o);

  auto* gen = app.add_subcommand("gen", "Generate a scene with its DR and SEM labels");
  gen->add_option("--out", o.out, "Output directory")->required();

  auto* decode = app.add_subcommand("decode", "Decode DR maps into proposals (with NMS)");
  decode->add_option("--maps", o.maps, "Directory with score.rmap and offset_<i>.rmap")->required();
  decode->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* refine = app.add_subcommand("refine", "Refine proposals with the attention oracle");
  refine->add_option("--scene", o.scene, "Scene JSON")->required();
  refine->add_option("--proposals", o.proposals, "Proposal JSON")->required();
  refine->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* recon = app.add_subcommand("reconstruct", "Reconstruct a text polygon from SEM maps");
  recon->add_option("--maps", o.maps, "Directory with tr, tcl and border_<i> maps")->required();
  recon->add_option("--quad", o.quad, "Proposal quadrangle the maps are defined over");
  recon->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* eval = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  eval->add_option("--pred", o.pred, "Per-image arrays of scored polygons")->required();
  eval->add_option("--gt", o.gt, "Per-image arrays of gt polygons")->required();
  eval->add_option("--out", o.out, "Output JSON (default stdout)");

  auto* e2e = app.add_subcommand("e2e", "Run the full pipeline on a generated corpus");
  e2e->add_option("--out", o.out, "Report JSON (default stdout)");

  auto* render = app.add_subcommand("render", "Draw a scene and its detections as SVG");
  render->add_option("--scene", o.scene, "Scene JSON")->required();
  render->add_option("--report", o.report, "e2e report with detections");
  render->add_option("--index", o.index, "Scene index within the report");
  render->add_option("--out", o.out, "Output SVG (default stdout)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitValidation;
  }

  try {
    o.config.dr_mode = pipeline::dr_mode_from_string(o.dr_mode);
    o.config.validate();
    o.spec.downsample = o.config.downsample;
    o.spec.validate();
    if (o.scenes < 0) throw ValidationError("--scenes must be >= 0");
    if (gen->parsed()) return cmd_gen(o);
    if (decode->parsed()) return cmd_decode(o);
    if (refine->parsed()) return cmd_refine(o);
    if (recon->parsed()) return cmd_reconstruct(o);
    if (eval->parsed()) return cmd_eval(o);
    if (e2e->parsed()) return cmd_e2e(o);
    if (render->parsed()) return cmd_render(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "error: bad JSON: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
