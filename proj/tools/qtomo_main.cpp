// Command-line driver: phantom generation, projection, QUBO build/solve,
// the classical baseline, mask comparison, and the end-to-end pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtomo/qtomo.hpp"

namespace {

using nlohmann::json;

// Relative output paths land in $QTOMO_OUT_DIR when it is set.
std::string resolve_out(const std::string& path) {
    const char* base = std::getenv("QTOMO_OUT_DIR");
    std::filesystem::path p(path);
    if (base && *base && p.is_relative()) p = std::filesystem::path(base) / p;
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    return p.string();
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find(',', start);
        const std::string item =
            text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        if (item.empty())
            throw qtomo::InvalidArgument(std::string(what) + " contains an empty entry");
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw qtomo::InvalidArgument(std::string(what) + ": bad number '" + item + "'");
        }
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

qtomo::ProjectionGeometry make_geometry(int width, int height, int num_angles,
                                        const std::string& angle_list, int bins,
                                        double bin_width, double detector_offset) {
    qtomo::ProjectionGeometry g;
    if (!angle_list.empty())
        g.angles_deg = parse_list(angle_list, "--angle-list");
    else
        g.angles_deg = qtomo::uniform_angles(num_angles);
    g.bin_count = bins > 0 ? bins
                           : static_cast<int>(std::ceil(std::hypot(static_cast<double>(width),
                                                                   static_cast<double>(height))));
    g.bin_width = bin_width;
    g.detector_offset = detector_offset;
    g.validate();
    return g;
}

void add_noise(qtomo::Sinogram& sino, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return;
    qtomo::SplitMix64 rng(seed);
    for (double& v : sino.values) v += sigma * rng.next_gaussian();
}

qtomo::BinaryImage mask_from_image(const qtomo::GridImage& img) {
    qtomo::BinaryImage mask(img.width, img.height);
    for (std::size_t p = 0; p < img.values.size(); ++p) mask.mask[p] = img.values[p] > 0.0;
    return mask;
}

void write_assignment(const std::string& path, const qtomo::Assignment& x) {
    auto f = std::ofstream(path);
    if (!f) throw qtomo::IoError("cannot open '" + path + "' for writing");
    for (auto b : x) f << (b ? '1' : '0');
    f << '\n';
    if (!f) throw qtomo::IoError("write failed for '" + path + "'");
}

void write_json(const std::string& path, const json& j) {
    auto f = std::ofstream(path);
    if (!f) throw qtomo::IoError("cannot open '" + path + "' for writing");
    f << j.dump(2) << '\n';
    if (!f) throw qtomo::IoError("write failed for '" + path + "'");
}

json solve_report(const qtomo::QuboModel& model, const qtomo::SolveResult& result,
                  const std::string& solver) {
    const double floor = -model.offset;
    if (result.best_energy < floor - 1e-6 * std::max(1.0, model.offset))
        throw qtomo::Error("achieved energy violates the theoretical floor");
    json j;
    j["solver"] = solver;
    j["offset"] = model.offset;
    j["theoretical_minimum"] = floor;
    j["achieved_energy"] = result.best_energy;
    j["gap_percent"] =
        model.offset > 0.0 ? 100.0 * (result.best_energy - floor) / model.offset : 0.0;
    j["one_hot_valid"] = result.one_hot_valid;
    json energies = json::array();
    for (const auto& [x, e] : result.samples) energies.push_back(e);
    j["sample_energies"] = energies;
    return j;
}

// ---------------------------------------------------------------------------

struct PhantomArgs {
    std::string kind = "disk";
    int width = 16, height = 16;
    std::uint64_t seed = 0;
    std::string out = "phantom.pgm";
    std::string csv;
};

void cmd_phantom(const PhantomArgs& a) {
    const auto mask =
        qtomo::generate_phantom(qtomo::phantom_kind_from_string(a.kind), a.width, a.height, a.seed);
    qtomo::write_pgm_mask(resolve_out(a.out), mask);
    if (!a.csv.empty())
        qtomo::write_image_csv(resolve_out(a.csv), qtomo::scale_binary(mask, 1.0));
    std::cout << "phantom " << a.kind << " " << a.width << "x" << a.height << ", "
              << mask.count() << " set pixels -> " << a.out << "\n";
}

struct ProjectArgs {
    std::string image;
    int angles = 18;
    std::string angle_list;
    int bins = 0;
    double bin_width = 1.0;
    double detector_offset = 0.0;
    double alpha = 1.0;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 1;
    std::string out = "sinogram.csv";
};

void cmd_project(const ProjectArgs& a) {
    qtomo::GridImage img = qtomo::read_image_csv(a.image);
    if (a.alpha < 0.0) throw qtomo::InvalidArgument("--alpha must be >= 0");
    for (double& v : img.values) v *= a.alpha;
    const auto geom = make_geometry(img.width, img.height, a.angles, a.angle_list, a.bins,
                                    a.bin_width, a.detector_offset);
    const auto sm = qtomo::build_system_matrix(geom, img.width, img.height);
    qtomo::Sinogram sino = qtomo::forward_project(sm, img);
    add_noise(sino, a.noise_sigma, a.noise_seed);
    qtomo::write_sinogram_csv(resolve_out(a.out), sino);
    std::cout << "projected " << img.width << "x" << img.height << " at " << geom.num_angles()
              << " angles, " << geom.bin_count << " bins -> " << a.out << "\n";
}

struct BuildArgs {
    std::string sinogram;
    int width = 0, height = 0;
    std::string mode = "segmentation";
    std::string levels = "1";
    double penalty = -1.0; // <0 = auto for multi-level, 0 for single level
    int bits = 2;
    std::string weight_model = "area";
    int subsample_k = 64;
    std::string out = "model.qubo";
};

void cmd_build(const BuildArgs& a) {
    const qtomo::Sinogram sino = qtomo::read_sinogram_csv(a.sinogram);
    if (a.width < 1 || a.height < 1)
        throw qtomo::InvalidArgument("--width and --height are required and must be >= 1");
    qtomo::WeightModel wm = qtomo::WeightModel::area_overlap();
    if (a.weight_model == "subsample")
        wm = qtomo::WeightModel::subsample(a.subsample_k);
    else if (a.weight_model != "area")
        throw qtomo::InvalidArgument("--weight-model must be 'area' or 'subsample'");
    const auto sm = qtomo::build_system_matrix(sino.geometry, a.width, a.height, wm);

    qtomo::QuboModel model;
    if (a.mode == "segmentation") {
        qtomo::AttenuationSpec spec;
        spec.levels = parse_list(a.levels, "--levels");
        spec.one_hot_penalty = 0.0;
        spec.validate();
        if (a.penalty >= 0.0)
            spec.one_hot_penalty = a.penalty;
        else if (spec.levels.size() > 1)
            spec.one_hot_penalty = qtomo::auto_one_hot_penalty(sm, spec);
        const auto enc = qtomo::EncodingSpec::segmentation(a.width, a.height, spec);
        model = qtomo::build_segmentation_qubo(sm, sino, enc);
    } else if (a.mode == "reconstruction") {
        const auto enc = qtomo::EncodingSpec::reconstruction(a.width, a.height, a.bits);
        model = qtomo::build_reconstruction_qubo(sm, sino, enc);
    } else {
        throw qtomo::InvalidArgument("--mode must be 'segmentation' or 'reconstruction'");
    }
    qtomo::write_qubo(resolve_out(a.out), model);
    std::cout << "built " << a.mode << " model: " << model.num_vars << " vars, "
              << model.quadratic.size() << " quadratic terms, offset "
              << qtomo::detail::format_double(model.offset) << " -> " << a.out << "\n";
}

struct SolveArgs {
    std::string model;
    bool brute = false;
    int cap = 24;
    int sweeps = 20000;
    double t_initial = 0.0;
    double t_final = 0.05;
    int restarts = 8;
    std::uint64_t seed = 1;
    std::string out_prefix = "solve";
};

void cmd_solve(const SolveArgs& a) {
    const qtomo::QuboModel model = qtomo::read_qubo(a.model);
    qtomo::SolveResult result;
    std::string solver;
    if (a.brute) {
        result = qtomo::brute_force(model, a.cap);
        solver = "brute_force";
    } else {
        qtomo::AnnealSchedule sched;
        sched.sweeps = a.sweeps;
        sched.t_initial = a.t_initial;
        sched.t_final = a.t_final;
        sched.restarts = a.restarts;
        sched.seed = a.seed;
        result = qtomo::simulated_anneal(model, sched);
        solver = "simulated_annealing";
    }

    const json report = solve_report(model, result, solver);
    write_json(resolve_out(a.out_prefix + "_report.json"), report);
    write_assignment(resolve_out(a.out_prefix + "_assignment.txt"), result.best_assignment);
    if (model.layout) {
        const qtomo::GridImage img = qtomo::decode(result.best_assignment, *model.layout);
        qtomo::write_image_csv(resolve_out(a.out_prefix + "_image.csv"), img);
        if (model.layout->mode == qtomo::EncodingSpec::Mode::segmentation)
            qtomo::write_pgm_mask(resolve_out(a.out_prefix + "_mask.pgm"), mask_from_image(img));
        else
            qtomo::write_pgm_gray(resolve_out(a.out_prefix + "_image.pgm"), img);
    }
    std::cout << "energy " << qtomo::detail::format_double(result.best_energy)
              << ", theoretical minimum "
              << qtomo::detail::format_double(report["theoretical_minimum"].get<double>())
              << ", gap " << report["gap_percent"].get<double>() << "%\n";
}

struct BaselineArgs {
    std::string sinogram;
    int width = 0, height = 0;
    std::string filter = "ramp";
    std::string threshold = "otsu";
    std::string out_prefix = "baseline";
};

void cmd_baseline(const BaselineArgs& a) {
    const qtomo::Sinogram sino = qtomo::read_sinogram_csv(a.sinogram);
    if (a.width < 1 || a.height < 1)
        throw qtomo::InvalidArgument("--width and --height are required and must be >= 1");
    qtomo::FbpFilter filter;
    if (a.filter == "ramp")
        filter = qtomo::FbpFilter::ramp;
    else if (a.filter == "none")
        filter = qtomo::FbpFilter::none;
    else
        throw qtomo::InvalidArgument("--filter must be 'ramp' or 'none'");

    qtomo::ThresholdMethod method = qtomo::ThresholdMethod::otsu();
    if (a.threshold != "otsu") {
        const std::string prefix = "fixed:";
        if (a.threshold.rfind(prefix, 0) != 0)
            throw qtomo::InvalidArgument("--threshold must be 'otsu' or 'fixed:<value>'");
        method = qtomo::ThresholdMethod::fixed(
            parse_list(a.threshold.substr(prefix.size()), "--threshold").at(0));
    }

    const auto sm = qtomo::build_system_matrix(sino.geometry, a.width, a.height);
    const qtomo::GridImage fbp = qtomo::fbp_reconstruct(sino, sm, filter);
    const qtomo::BinaryImage mask = qtomo::threshold_segment(fbp, method);
    qtomo::write_image_csv(resolve_out(a.out_prefix + "_fbp.csv"), fbp);
    qtomo::write_pgm_gray(resolve_out(a.out_prefix + "_fbp.pgm"), fbp);
    qtomo::write_pgm_mask(resolve_out(a.out_prefix + "_mask.pgm"), mask);
    std::cout << "baseline reconstruction " << a.width << "x" << a.height << ", mask has "
              << mask.count() << " set pixels -> " << a.out_prefix << "_*\n";
}

struct CompareArgs {
    std::string a, b;
    std::string out_prefix = "compare";
};

void cmd_compare(const CompareArgs& c) {
    const qtomo::BinaryImage ma = qtomo::read_pgm_mask(c.a);
    const qtomo::BinaryImage mb = qtomo::read_pgm_mask(c.b);
    const auto metrics = qtomo::compare_segmentations(ma, mb);
    json j;
    j["dice"] = metrics.dice;
    j["pixel_agreement"] = metrics.pixel_agreement;
    j["a_set_pixels"] = ma.count();
    j["b_set_pixels"] = mb.count();
    j["disagreeing_pixels"] = metrics.diff_mask.count();
    write_json(resolve_out(c.out_prefix + "_metrics.json"), j);
    qtomo::write_pgm_mask(resolve_out(c.out_prefix + "_diff.pgm"), metrics.diff_mask);
    std::cout << "dice " << metrics.dice << ", agreement " << metrics.pixel_agreement << "\n";
}

struct RunConfig {
    int width = 16, height = 16;
    std::string kind = "disk";
    std::uint64_t seed = 0;
    int angles = 18;
    std::string angle_list;
    int bins = 0;
    double bin_width = 1.0;
    double detector_offset = 0.0;
    double alpha = 3.0;
    std::string levels; // overrides alpha when set, e.g. "2.5,3.5"
    double penalty = -1.0;
    std::string mode = "segmentation";
    int bits = 2;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 1;
    double background_offset = 0.0;
    bool subtract_background = false;
    bool estimate_alpha = false;
    bool brute = false;
    int sweeps = 20000;
    double t_initial = 0.0;
    double t_final = 0.05;
    int restarts = 8;
    std::uint64_t solver_seed = 1;
    std::string out_dir = ".";
};

void apply_config_file(RunConfig& c, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw qtomo::IoError("cannot open '" + path + "' for reading");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw qtomo::ParseError(std::string("bad config JSON: ") + e.what(), 1);
    }
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("width", c.width);
    get("height", c.height);
    get("kind", c.kind);
    get("seed", c.seed);
    get("angles", c.angles);
    get("angle_list", c.angle_list);
    get("bins", c.bins);
    get("bin_width", c.bin_width);
    get("detector_offset", c.detector_offset);
    get("alpha", c.alpha);
    get("levels", c.levels);
    get("penalty", c.penalty);
    get("mode", c.mode);
    get("bits", c.bits);
    get("noise_sigma", c.noise_sigma);
    get("noise_seed", c.noise_seed);
    get("background_offset", c.background_offset);
    get("subtract_background", c.subtract_background);
    get("estimate_alpha", c.estimate_alpha);
    get("brute_force", c.brute);
    get("sweeps", c.sweeps);
    get("t_initial", c.t_initial);
    get("t_final", c.t_final);
    get("restarts", c.restarts);
    get("solver_seed", c.solver_seed);
    get("out_dir", c.out_dir);
}

void cmd_run(const RunConfig& c) {
    namespace fs = std::filesystem;
    const fs::path out_dir = resolve_out(c.out_dir);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    auto out = [&](const char* name) { return (out_dir / name).string(); };

    // Ground truth and its projection.
    const auto truth =
        qtomo::generate_phantom(qtomo::phantom_kind_from_string(c.kind), c.width, c.height, c.seed);
    qtomo::write_pgm_mask(out("phantom.pgm"), truth);
    qtomo::write_image_csv(out("phantom.csv"), qtomo::scale_binary(truth, 1.0));

    const auto geom = make_geometry(c.width, c.height, c.angles, c.angle_list, c.bins,
                                    c.bin_width, c.detector_offset);
    const auto sm = qtomo::build_system_matrix(geom, c.width, c.height);

    qtomo::AttenuationSpec spec;
    spec.levels = c.levels.empty() ? std::vector<double>{c.alpha}
                                   : parse_list(c.levels, "levels");
    spec.validate();

    qtomo::Sinogram sino = qtomo::forward_project(sm, qtomo::scale_binary(truth, spec.levels[0]));
    if (c.background_offset != 0.0)
        for (double& v : sino.values) v += c.background_offset;
    add_noise(sino, c.noise_sigma, c.noise_seed);
    qtomo::write_sinogram_csv(out("sinogram.csv"), sino);

    // Preprocessing.
    if (c.subtract_background || c.background_offset != 0.0)
        sino = qtomo::background_subtract(sino);
    double alpha_estimated = 0.0;
    if (c.estimate_alpha) {
        alpha_estimated = qtomo::estimate_alpha(sino, sm, truth);
        spec.levels = {alpha_estimated};
    }

    // Model.
    qtomo::QuboModel model;
    if (c.mode == "segmentation") {
        if (c.penalty >= 0.0)
            spec.one_hot_penalty = c.penalty;
        else if (spec.levels.size() > 1)
            spec.one_hot_penalty = qtomo::auto_one_hot_penalty(sm, spec);
        model = qtomo::build_segmentation_qubo(
            sm, sino, qtomo::EncodingSpec::segmentation(c.width, c.height, spec));
    } else if (c.mode == "reconstruction") {
        model = qtomo::build_reconstruction_qubo(
            sm, sino, qtomo::EncodingSpec::reconstruction(c.width, c.height, c.bits));
    } else {
        throw qtomo::InvalidArgument("mode must be 'segmentation' or 'reconstruction'");
    }
    qtomo::write_qubo(out("model.qubo"), model);

    // Solve.
    qtomo::SolveResult result;
    std::string solver;
    if (c.brute) {
        result = qtomo::brute_force(model);
        solver = "brute_force";
    } else {
        qtomo::AnnealSchedule sched;
        sched.sweeps = c.sweeps;
        sched.t_initial = c.t_initial;
        sched.t_final = c.t_final;
        sched.restarts = c.restarts;
        sched.seed = c.solver_seed;
        result = qtomo::simulated_anneal(model, sched);
        solver = "simulated_annealing";
    }
    const qtomo::GridImage decoded = qtomo::decode(result.best_assignment, *model.layout);
    qtomo::write_image_csv(out("solve_image.csv"), decoded);
    const qtomo::BinaryImage qubo_mask = mask_from_image(decoded);
    qtomo::write_pgm_mask(out("solve_mask.pgm"), qubo_mask);

    // Baseline and comparisons.
    const qtomo::GridImage fbp = qtomo::fbp_reconstruct(sino, sm, qtomo::FbpFilter::ramp);
    qtomo::write_image_csv(out("baseline_fbp.csv"), fbp);
    qtomo::write_pgm_gray(out("baseline_fbp.pgm"), fbp);
    const qtomo::BinaryImage baseline_mask = qtomo::threshold_segment(fbp);
    qtomo::write_pgm_mask(out("baseline_mask.pgm"), baseline_mask);

    const auto vs_truth = qtomo::compare_segmentations(qubo_mask, truth);
    const auto baseline_vs_truth = qtomo::compare_segmentations(baseline_mask, truth);
    const auto vs_baseline = qtomo::compare_segmentations(qubo_mask, baseline_mask);
    qtomo::write_pgm_mask(out("diff_qubo_vs_baseline.pgm"), vs_baseline.diff_mask);

    json report = solve_report(model, result, solver);
    report["alpha_used"] = spec.levels;
    if (c.estimate_alpha) report["alpha_estimated"] = alpha_estimated;
    report["dice_qubo_vs_truth"] = vs_truth.dice;
    report["dice_baseline_vs_truth"] = baseline_vs_truth.dice;
    report["dice_qubo_vs_baseline"] = vs_baseline.dice;
    report["pixel_agreement_qubo_vs_truth"] = vs_truth.pixel_agreement;
    write_json(out("report.json"), report);

    std::cout << "energy " << qtomo::detail::format_double(result.best_energy)
              << " (theoretical minimum "
              << qtomo::detail::format_double(-model.offset) << ", gap "
              << report["gap_percent"].get<double>() << "%)\n"
              << "dice vs truth " << vs_truth.dice << ", baseline dice "
              << baseline_vs_truth.dice << " -> " << out_dir.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-step CT segmentation via QUBO models, with a classical baseline"};
    app.require_subcommand(1);

    PhantomArgs ph;
    auto* sub_ph = app.add_subcommand("phantom", "Generate a synthetic binary phantom");
    sub_ph->add_option("--kind", ph.kind, "disk|two_disks|random_blobs|checker");
    sub_ph->add_option("--width", ph.width);
    sub_ph->add_option("--height", ph.height);
    sub_ph->add_option("--seed", ph.seed);
    sub_ph->add_option("--out", ph.out, "output PGM mask path");
    sub_ph->add_option("--csv", ph.csv, "also write the mask as an image CSV");

    ProjectArgs pr;
    auto* sub_pr = app.add_subcommand("project", "Forward-project an image CSV to a sinogram");
    sub_pr->add_option("--image", pr.image, "input image CSV")->required();
    sub_pr->add_option("--angles", pr.angles, "number of uniform angles in [0, 180)");
    sub_pr->add_option("--angle-list", pr.angle_list, "explicit angles, e.g. '0,60,120'");
    sub_pr->add_option("--bins", pr.bins, "detector bins (0 = auto)");
    sub_pr->add_option("--bin-width", pr.bin_width);
    sub_pr->add_option("--detector-offset", pr.detector_offset);
    sub_pr->add_option("--alpha", pr.alpha, "scale image values before projecting");
    sub_pr->add_option("--noise-sigma", pr.noise_sigma, "additive Gaussian noise");
    sub_pr->add_option("--noise-seed", pr.noise_seed);
    sub_pr->add_option("--out", pr.out, "output sinogram CSV path");

    BuildArgs bu;
    auto* sub_bu = app.add_subcommand("build", "Assemble a QUBO model from a sinogram");
    sub_bu->add_option("--sinogram", bu.sinogram, "input sinogram CSV")->required();
    sub_bu->add_option("--width", bu.width, "image width")->required();
    sub_bu->add_option("--height", bu.height, "image height")->required();
    sub_bu->add_option("--mode", bu.mode, "segmentation|reconstruction");
    sub_bu->add_option("--levels", bu.levels, "attenuation levels, e.g. '3' or '2.5,3.5'");
    sub_bu->add_option("--penalty", bu.penalty, "one-hot penalty (<0 = auto for multi-level)");
    sub_bu->add_option("--bits", bu.bits, "bits per pixel (reconstruction)");
    sub_bu->add_option("--weight-model", bu.weight_model, "area|subsample");
    sub_bu->add_option("--subsample-k", bu.subsample_k);
    sub_bu->add_option("--out", bu.out, "output QUBO file path");

    SolveArgs so;
    auto* sub_so = app.add_subcommand("solve", "Minimize a QUBO file");
    sub_so->add_option("--model", so.model, "input QUBO file")->required();
    sub_so->add_flag("--brute-force", so.brute, "exact enumeration instead of annealing");
    sub_so->add_option("--cap", so.cap, "brute-force variable cap");
    sub_so->add_option("--sweeps", so.sweeps);
    sub_so->add_option("--t-initial", so.t_initial, "0 = auto");
    sub_so->add_option("--t-final", so.t_final);
    sub_so->add_option("--restarts", so.restarts);
    sub_so->add_option("--seed", so.seed);
    sub_so->add_option("--out-prefix", so.out_prefix);

    BaselineArgs ba;
    auto* sub_ba = app.add_subcommand("baseline", "FBP reconstruction plus threshold segmentation");
    sub_ba->add_option("--sinogram", ba.sinogram, "input sinogram CSV")->required();
    sub_ba->add_option("--width", ba.width, "image width")->required();
    sub_ba->add_option("--height", ba.height, "image height")->required();
    sub_ba->add_option("--filter", ba.filter, "ramp|none");
    sub_ba->add_option("--threshold", ba.threshold, "otsu|fixed:<value>");
    sub_ba->add_option("--out-prefix", ba.out_prefix);

    CompareArgs co;
    auto* sub_co = app.add_subcommand("compare", "Compare two PGM masks");
    sub_co->add_option("--a", co.a, "first mask PGM")->required();
    sub_co->add_option("--b", co.b, "second mask PGM")->required();
    sub_co->add_option("--out-prefix", co.out_prefix);

    RunConfig rc;
    std::string config_path;
    auto* sub_run = app.add_subcommand("run", "Full pipeline: phantom to report");
    sub_run->add_option("--config", config_path, "JSON config file (flags override it)");
    auto* o_width = sub_run->add_option("--width", rc.width);
    auto* o_height = sub_run->add_option("--height", rc.height);
    auto* o_kind = sub_run->add_option("--kind", rc.kind);
    auto* o_seed = sub_run->add_option("--seed", rc.seed);
    auto* o_angles = sub_run->add_option("--angles", rc.angles);
    auto* o_angle_list = sub_run->add_option("--angle-list", rc.angle_list);
    auto* o_bins = sub_run->add_option("--bins", rc.bins);
    auto* o_alpha = sub_run->add_option("--alpha", rc.alpha);
    auto* o_levels = sub_run->add_option("--levels", rc.levels);
    auto* o_penalty = sub_run->add_option("--penalty", rc.penalty);
    auto* o_mode = sub_run->add_option("--mode", rc.mode);
    auto* o_bits = sub_run->add_option("--bits", rc.bits);
    auto* o_noise = sub_run->add_option("--noise-sigma", rc.noise_sigma);
    auto* o_noise_seed = sub_run->add_option("--noise-seed", rc.noise_seed);
    auto* o_bg = sub_run->add_option("--background-offset", rc.background_offset);
    auto* o_sub = sub_run->add_flag("--subtract-background", rc.subtract_background);
    auto* o_est = sub_run->add_flag("--estimate-alpha", rc.estimate_alpha);
    auto* o_brute = sub_run->add_flag("--brute-force", rc.brute);
    auto* o_sweeps = sub_run->add_option("--sweeps", rc.sweeps);
    auto* o_t0 = sub_run->add_option("--t-initial", rc.t_initial);
    auto* o_t1 = sub_run->add_option("--t-final", rc.t_final);
    auto* o_restarts = sub_run->add_option("--restarts", rc.restarts);
    auto* o_solver_seed = sub_run->add_option("--solver-seed", rc.solver_seed);
    auto* o_out_dir = sub_run->add_option("--out-dir", rc.out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sub_ph->parsed()) cmd_phantom(ph);
        if (sub_pr->parsed()) cmd_project(pr);
        if (sub_bu->parsed()) cmd_build(bu);
        if (sub_so->parsed()) cmd_solve(so);
        if (sub_ba->parsed()) cmd_baseline(ba);
        if (sub_co->parsed()) cmd_compare(co);
        if (sub_run->parsed()) {
            if (!config_path.empty()) {
                RunConfig from_file;
                apply_config_file(from_file, config_path);
                // Explicit flags win over the config file.
                if (!*o_width) rc.width = from_file.width;
                if (!*o_height) rc.height = from_file.height;
                if (!*o_kind) rc.kind = from_file.kind;
                if (!*o_seed) rc.seed = from_file.seed;
                if (!*o_angles) rc.angles = from_file.angles;
                if (!*o_angle_list) rc.angle_list = from_file.angle_list;
                if (!*o_bins) rc.bins = from_file.bins;
                if (!*o_alpha) rc.alpha = from_file.alpha;
                if (!*o_levels) rc.levels = from_file.levels;
                if (!*o_penalty) rc.penalty = from_file.penalty;
                if (!*o_mode) rc.mode = from_file.mode;
                if (!*o_bits) rc.bits = from_file.bits;
                if (!*o_noise) rc.noise_sigma = from_file.noise_sigma;
                if (!*o_noise_seed) rc.noise_seed = from_file.noise_seed;
                if (!*o_bg) rc.background_offset = from_file.background_offset;
                if (!*o_sub) rc.subtract_background = from_file.subtract_background;
                if (!*o_est) rc.estimate_alpha = from_file.estimate_alpha;
                if (!*o_brute) rc.brute = from_file.brute;
                if (!*o_sweeps) rc.sweeps = from_file.sweeps;
                if (!*o_t0) rc.t_initial = from_file.t_initial;
                if (!*o_t1) rc.t_final = from_file.t_final;
                if (!*o_restarts) rc.restarts = from_file.restarts;
                if (!*o_solver_seed) rc.solver_seed = from_file.solver_seed;
                if (!*o_out_dir) rc.out_dir = from_file.out_dir;
            }
            cmd_run(rc);
        }
    } catch (const qtomo::TooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const qtomo::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const qtomo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
