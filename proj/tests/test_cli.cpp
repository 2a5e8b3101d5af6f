// End-to-end checks of the command-line tool: every subcommand is driven
// through std::system against the installed binary (path injected by the
// build as QTOMO_CLI_PATH).

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qtomo/qtomo.hpp"

using namespace qtomo;
using nlohmann::json;

namespace {

std::string scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "qtomo_cli_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + QTOMO_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

// 16x16 disk phantom written once; several tests project or rebuild from it.
const std::string& disk_csv() {
    static const std::string path = [] {
        const auto p = scratch("disk.csv");
        const auto q = scratch("disk.pgm");
        REQUIRE(run_cli("phantom --kind disk --width 16 --height 16 --seed 0 --out \"" + q +
                        "\" --csv \"" + p + "\"") == 0);
        return p;
    }();
    return path;
}

} // namespace

TEST_CASE("phantom subcommand") {
    const auto pgm = scratch("ph_disk.pgm");
    const auto csv = scratch("ph_disk.csv");
    REQUIRE(run_cli("phantom --kind disk --width 16 --height 16 --seed 0 --out \"" + pgm +
                    "\" --csv \"" + csv + "\"") == 0);
    const auto mask = read_pgm_mask(pgm);
    REQUIRE(mask.width == 16);
    REQUIRE(mask.count() == 80);
    const auto img = read_image_csv(csv);
    REQUIRE(img.sum() == 80.0);

    const auto checker = scratch("ph_checker.pgm");
    REQUIRE(run_cli("phantom --kind checker --width 2 --height 2 --out \"" + checker + "\"") == 0);
    REQUIRE(read_pgm_mask(checker).mask == std::vector<std::uint8_t>{1, 0, 0, 1});

    REQUIRE(run_cli("phantom --kind hexagon --out \"" + pgm + "\"") == 2);
}

TEST_CASE("project subcommand") {
    SECTION("zero image projects to a zero sinogram") {
        const auto in = scratch("pr_zero.csv");
        write_image_csv(in, GridImage(4, 4, 0.0));
        const auto out = scratch("pr_zero_sino.csv");
        REQUIRE(run_cli("project --image \"" + in + "\" --angles 5 --out \"" + out + "\"") == 0);
        const auto sino = read_sinogram_csv(out);
        REQUIRE(sino.num_angles() == 5);
        REQUIRE(sino.num_bins() == 6);
        REQUIRE(sino.geometry.angles_deg == uniform_angles(5));
        for (double v : sino.values) REQUIRE(v == 0.0);
    }
    SECTION("disk rows at 0 and 90 degrees agree, and mass is conserved") {
        const auto out = scratch("pr_disk_sino.csv");
        REQUIRE(run_cli("project --image \"" + disk_csv() + "\" --angle-list 0,90 --out \"" + out +
                        "\"") == 0);
        const auto sino = read_sinogram_csv(out);
        REQUIRE(sino.num_bins() == 23);
        for (int b = 0; b < sino.num_bins(); ++b)
            REQUIRE(sino.at(0, b) == Catch::Approx(sino.at(1, b)).margin(1e-6));
        for (int a = 0; a < 2; ++a) {
            double row = 0.0;
            for (int b = 0; b < sino.num_bins(); ++b) row += sino.at(a, b);
            REQUIRE(row == Catch::Approx(80.0).margin(1e-6));
        }
    }
    SECTION("alpha scales the projection") {
        const auto out = scratch("pr_alpha_sino.csv");
        REQUIRE(run_cli("project --image \"" + disk_csv() + "\" --angle-list 0 --alpha 2.5 --out \"" +
                        out + "\"") == 0);
        const auto sino = read_sinogram_csv(out);
        REQUIRE(sino.sum() == Catch::Approx(200.0).margin(1e-6));
    }
    SECTION("argument and input failures") {
        REQUIRE(run_cli("project --image \"" + disk_csv() + "\" --alpha -1 --out \"" +
                        scratch("x.csv") + "\"") == 2);
        REQUIRE(run_cli("project --image \"" + scratch("missing.csv") + "\" --out \"" +
                        scratch("x.csv") + "\"") == 3);
    }
}

TEST_CASE("build subcommand") {
    const auto sino_path = scratch("bu_sino.csv");
    REQUIRE(run_cli("project --image \"" + disk_csv() + "\" --angle-list 0,60,120 --alpha 3 --out \"" +
                    sino_path + "\"") == 0);

    SECTION("offset records the excluded constant") {
        const auto model_path = scratch("bu_model.qubo");
        REQUIRE(run_cli("build --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --levels 3 --out \"" + model_path + "\"") == 0);
        const auto model = read_qubo(model_path);
        REQUIRE(model.num_vars == 256);
        REQUIRE(model.layout.has_value());
        REQUIRE(model.layout->mode == EncodingSpec::Mode::segmentation);
        const auto sino = read_sinogram_csv(sino_path);
        double ss = 0.0;
        for (double v : sino.values) ss += v * v;
        REQUIRE(model.offset == Catch::Approx(ss).epsilon(1e-12));
    }
    SECTION("zero sinogram yields only nonnegative coefficients") {
        const auto zero_img = scratch("bu_zero.csv");
        write_image_csv(zero_img, GridImage(4, 4, 0.0));
        const auto zero_sino = scratch("bu_zero_sino.csv");
        REQUIRE(run_cli("project --image \"" + zero_img + "\" --angles 3 --out \"" + zero_sino +
                        "\"") == 0);
        const auto model_path = scratch("bu_zero_model.qubo");
        REQUIRE(run_cli("build --sinogram \"" + zero_sino +
                        "\" --width 4 --height 4 --levels 1 --out \"" + model_path + "\"") == 0);
        const auto model = read_qubo(model_path);
        REQUIRE(model.offset == 0.0);
        for (double v : model.linear) REQUIRE(v >= 0.0);
        for (const auto& t : model.quadratic) REQUIRE(t.value >= 0.0);
    }
    SECTION("bit-encoded mode") {
        const auto model_path = scratch("bu_rec_model.qubo");
        REQUIRE(run_cli("build --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --mode reconstruction --bits 2 --out \"" +
                        model_path + "\"") == 0);
        const auto model = read_qubo(model_path);
        REQUIRE(model.num_vars == 512);
        REQUIRE(model.layout->mode == EncodingSpec::Mode::reconstruction);
    }
    SECTION("identical inputs produce identical files") {
        const auto p1 = scratch("bu_det_1.qubo");
        const auto p2 = scratch("bu_det_2.qubo");
        const auto args = std::string("build --sinogram \"") + sino_path +
                          "\" --width 16 --height 16 --levels 3 --out \"";
        REQUIRE(run_cli(args + p1 + "\"") == 0);
        REQUIRE(run_cli(args + p2 + "\"") == 0);
        REQUIRE(slurp(p1) == slurp(p2));
    }
    SECTION("argument failures") {
        REQUIRE(run_cli("build --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --mode banana --out x.qubo") == 2);
        REQUIRE(run_cli("build --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --levels abc --out x.qubo") == 2);
    }
}

TEST_CASE("solve subcommand") {
    SECTION("exact enumeration of a tiny hand-written model") {
        const auto model_path = scratch("so_tiny.qubo");
        {
            std::ofstream f(model_path);
            f << "#version 1\n#vars 2\n#offset 2\n0 0 1\n1 1 -2\n0 1 3\n";
        }
        const auto prefix = scratch("so_tiny");
        REQUIRE(run_cli("solve --model \"" + model_path + "\" --brute-force --out-prefix \"" +
                        prefix + "\"") == 0);
        REQUIRE(slurp(prefix + "_assignment.txt") == "01\n");
        const auto report = read_json(prefix + "_report.json");
        REQUIRE(report["solver"] == "brute_force");
        REQUIRE(report["achieved_energy"].get<double>() == -2.0);
        REQUIRE(report["theoretical_minimum"].get<double>() == -2.0);
        REQUIRE(report["gap_percent"].get<double>() == 0.0);
        REQUIRE(report["one_hot_valid"].get<bool>());
        REQUIRE(report["sample_energies"].size() == 1);
    }
    SECTION("segmentation model solved exactly recovers the image") {
        const auto img_path = scratch("so_diag.csv");
        GridImage diag(2, 2, 0.0);
        diag.at(0, 0) = 1.0;
        diag.at(1, 1) = 1.0;
        write_image_csv(img_path, diag);
        const auto sino_path = scratch("so_diag_sino.csv");
        REQUIRE(run_cli("project --image \"" + img_path + "\" --angle-list 0,45,90 --out \"" +
                        sino_path + "\"") == 0);
        const auto model_path = scratch("so_diag.qubo");
        REQUIRE(run_cli("build --sinogram \"" + sino_path +
                        "\" --width 2 --height 2 --levels 1 --out \"" + model_path + "\"") == 0);
        const auto prefix = scratch("so_diag");
        REQUIRE(run_cli("solve --model \"" + model_path + "\" --brute-force --out-prefix \"" +
                        prefix + "\"") == 0);
        REQUIRE(read_pgm_mask(prefix + "_mask.pgm").mask == std::vector<std::uint8_t>{1, 0, 0, 1});
        const auto decoded = read_image_csv(prefix + "_image.csv");
        REQUIRE(decoded.values == diag.values);
    }
    SECTION("annealing runs are reproducible") {
        const auto model_path = scratch("so_sa.qubo");
        {
            std::ofstream f(model_path);
            f << "#version 1\n#vars 6\n#offset 10\n0 0 1\n1 1 -2\n2 2 0.5\n3 3 -1\n"
              << "0 1 3\n1 2 -0.5\n2 5 1.5\n3 4 -2.5\n";
        }
        const auto args = std::string("solve --model \"") + model_path +
                          "\" --sweeps 500 --restarts 3 --seed 12 --out-prefix \"";
        const auto p1 = scratch("so_sa_1");
        const auto p2 = scratch("so_sa_2");
        REQUIRE(run_cli(args + p1 + "\"") == 0);
        REQUIRE(run_cli(args + p2 + "\"") == 0);
        REQUIRE(slurp(p1 + "_report.json") == slurp(p2 + "_report.json"));
        REQUIRE(slurp(p1 + "_assignment.txt") == slurp(p2 + "_assignment.txt"));
    }
    SECTION("brute force refuses oversized models") {
        const auto sino_path = scratch("so_big_sino.csv");
        REQUIRE(run_cli("project --image \"" + disk_csv() + "\" --angle-list 0,60,120 --out \"" +
                        sino_path + "\"") == 0);
        const auto model_path = scratch("so_big.qubo");
        REQUIRE(run_cli("build --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --levels 1 --out \"" + model_path + "\"") == 0);
        REQUIRE(run_cli("solve --model \"" + model_path + "\" --brute-force --out-prefix \"" +
                        scratch("so_big") + "\"") == 4);
    }
    SECTION("schedule and input failures") {
        const auto model_path = scratch("so_tiny.qubo"); // exists from the first section? rewrite
        {
            std::ofstream f(model_path);
            f << "#version 1\n#vars 2\n#offset 2\n0 0 1\n1 1 -2\n0 1 3\n";
        }
        REQUIRE(run_cli("solve --model \"" + model_path + "\" --sweeps 0 --out-prefix \"" +
                        scratch("so_bad") + "\"") == 2);
        REQUIRE(run_cli("solve --model \"" + scratch("so_missing.qubo") + "\" --out-prefix \"" +
                        scratch("so_bad") + "\"") == 3);
    }
}

TEST_CASE("baseline subcommand") {
    const auto sino_path = scratch("ba_sino.csv");
    REQUIRE(run_cli("project --image \"" + disk_csv() + "\" --angles 60 --out \"" + sino_path +
                    "\"") == 0);

    SECTION("disk reconstruction and segmentation") {
        const auto prefix = scratch("ba_disk");
        REQUIRE(run_cli("baseline --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --out-prefix \"" + prefix + "\"") == 0);
        const auto fbp = read_image_csv(prefix + "_fbp.csv");
        REQUIRE(fbp.width == 16);
        REQUIRE(fbp.height == 16);
        const auto mask = read_pgm_mask(prefix + "_mask.pgm");
        const auto truth = read_pgm_mask(scratch("disk.pgm"));
        REQUIRE(compare_segmentations(mask, truth).dice >= 0.90);
    }
    SECTION("zero sinogram has no histogram threshold") {
        const auto zero_img = scratch("ba_zero.csv");
        write_image_csv(zero_img, GridImage(8, 8, 0.0));
        const auto zero_sino = scratch("ba_zero_sino.csv");
        REQUIRE(run_cli("project --image \"" + zero_img + "\" --angles 4 --out \"" + zero_sino +
                        "\"") == 0);
        REQUIRE(run_cli("baseline --sinogram \"" + zero_sino +
                        "\" --width 8 --height 8 --out-prefix \"" + scratch("ba_zero") + "\"") == 3);
        // A fixed threshold sidesteps the histogram and succeeds.
        REQUIRE(run_cli("baseline --sinogram \"" + zero_sino +
                        "\" --width 8 --height 8 --threshold fixed:0.5 --out-prefix \"" +
                        scratch("ba_zero_fixed") + "\"") == 0);
    }
    SECTION("argument failures") {
        REQUIRE(run_cli("baseline --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --filter gauss --out-prefix x") == 2);
        REQUIRE(run_cli("baseline --sinogram \"" + sino_path +
                        "\" --width 16 --height 16 --threshold fixed:abc --out-prefix x") == 2);
    }
}

TEST_CASE("compare subcommand") {
    const auto pa = scratch("co_a.pgm");
    const auto pb = scratch("co_b.pgm");
    BinaryImage a(4, 1), b(4, 1);
    a.mask = {1, 1, 0, 0};
    b.mask = {0, 0, 1, 1};
    write_pgm_mask(pa, a);
    write_pgm_mask(pb, b);

    SECTION("identical masks") {
        const auto prefix = scratch("co_same");
        REQUIRE(run_cli("compare --a \"" + pa + "\" --b \"" + pa + "\" --out-prefix \"" + prefix +
                        "\"") == 0);
        const auto metrics = read_json(prefix + "_metrics.json");
        REQUIRE(metrics["dice"].get<double>() == 1.0);
        REQUIRE(metrics["pixel_agreement"].get<double>() == 1.0);
        REQUIRE(metrics["disagreeing_pixels"].get<int>() == 0);
        REQUIRE(read_pgm_mask(prefix + "_diff.pgm").count() == 0);
    }
    SECTION("disjoint masks") {
        const auto prefix = scratch("co_disjoint");
        REQUIRE(run_cli("compare --a \"" + pa + "\" --b \"" + pb + "\" --out-prefix \"" + prefix +
                        "\"") == 0);
        const auto metrics = read_json(prefix + "_metrics.json");
        REQUIRE(metrics["dice"].get<double>() == 0.0);
        REQUIRE(metrics["a_set_pixels"].get<int>() == 2);
        REQUIRE(metrics["b_set_pixels"].get<int>() == 2);
        REQUIRE(read_pgm_mask(prefix + "_diff.pgm").count() == 4);
    }
    SECTION("dimension mismatch") {
        const auto pc = scratch("co_c.pgm");
        write_pgm_mask(pc, BinaryImage(3, 2));
        REQUIRE(run_cli("compare --a \"" + pa + "\" --b \"" + pc + "\" --out-prefix \"" +
                        scratch("co_bad") + "\"") == 3);
    }
}

TEST_CASE("run subcommand") {
    SECTION("exact pipeline on a small phantom") {
        const auto dir = scratch("run_small");
        REQUIRE(run_cli("run --width 4 --height 4 --kind checker --angle-list 0,60,120 --alpha 2 "
                        "--brute-force --out-dir \"" + dir + "\"") == 0);
        for (const char* name : {"phantom.pgm", "phantom.csv", "sinogram.csv", "model.qubo",
                                 "solve_image.csv", "solve_mask.pgm", "baseline_fbp.csv",
                                 "baseline_fbp.pgm", "baseline_mask.pgm",
                                 "diff_qubo_vs_baseline.pgm", "report.json"})
            REQUIRE(std::filesystem::exists(std::filesystem::path(dir) / name));
        const auto report = read_json((std::filesystem::path(dir) / "report.json").string());
        REQUIRE(report["solver"] == "brute_force");
        const double floor = report["theoretical_minimum"].get<double>();
        const double achieved = report["achieved_energy"].get<double>();
        REQUIRE(achieved >= floor - 1e-9);
        REQUIRE(achieved <= floor + 1e-9 * std::abs(floor));
        REQUIRE(report["gap_percent"].get<double>() <= 1e-9);
        REQUIRE(report["dice_qubo_vs_truth"].get<double>() >= 0.0);
        REQUIRE(report["alpha_used"][0].get<double>() == 2.0);
    }
    SECTION("config file supplies defaults and flags override it") {
        const auto cfg_path = scratch("run_cfg.json");
        {
            json cfg;
            cfg["width"] = 4;
            cfg["height"] = 4;
            cfg["kind"] = "disk";
            cfg["angle_list"] = "0,60,120";
            cfg["alpha"] = 2.0;
            cfg["brute_force"] = true;
            std::ofstream f(cfg_path);
            f << cfg.dump(2) << "\n";
        }
        const auto dir = scratch("run_cfg_out");
        REQUIRE(run_cli("run --config \"" + cfg_path + "\" --kind checker --out-dir \"" + dir +
                        "\"") == 0);
        const auto phantom = read_pgm_mask((std::filesystem::path(dir) / "phantom.pgm").string());
        REQUIRE(phantom.mask == generate_phantom(PhantomKind::checker, 4, 4, 0).mask);
    }
    SECTION("annealed pipeline with noise and background") {
        const auto dir = scratch("run_noise");
        REQUIRE(run_cli("run --width 16 --height 16 --kind disk --angles 12 --alpha 3 "
                        "--noise-sigma 0.01 --background-offset 0.4 --sweeps 150 --restarts 2 "
                        "--out-dir \"" + dir + "\"") == 0);
        const auto report = read_json((std::filesystem::path(dir) / "report.json").string());
        REQUIRE(report["solver"] == "simulated_annealing");
        REQUIRE(report["sample_energies"].size() == 2);
        REQUIRE(report["achieved_energy"].get<double>() >=
                report["theoretical_minimum"].get<double>() - 1e-6);
    }
    SECTION("attenuation estimation from a reference") {
        const auto dir = scratch("run_est");
        REQUIRE(run_cli("run --width 4 --height 4 --kind checker --angle-list 0,60,120 "
                        "--alpha 2.7 --estimate-alpha --brute-force --out-dir \"" + dir +
                        "\"") == 0);
        const auto report = read_json((std::filesystem::path(dir) / "report.json").string());
        REQUIRE(report["alpha_estimated"].get<double>() == Catch::Approx(2.7).margin(1e-9));
    }
}

TEST_CASE("usage errors and help") {
    REQUIRE(run_cli("") == 2);
    REQUIRE(run_cli("phantom --bogus 1") == 2);
    REQUIRE(run_cli("--help") == 0);
}

TEST_CASE("relative outputs land in the directory named by the environment") {
    const auto dir = scratch("env_out");
    std::filesystem::create_directories(dir);
    const std::string cmd = "QTOMO_OUT_DIR=\"" + dir + "\" \"" + QTOMO_CLI_PATH +
                            "\" phantom --kind disk --out env_disk.pgm >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    REQUIRE(WEXITSTATUS(status) == 0);
    REQUIRE(std::filesystem::exists(std::filesystem::path(dir) / "env_disk.pgm"));
}
