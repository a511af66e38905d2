#include <iostream>

#include <CLI11.hpp>

#include "thermofem/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Coupled nonlinear acoustic wave and heat solver"};
    app.require_subcommand(1);

    thermofem::RunOptions mms_opts, scenario_opts;
    std::string mms_config, scenario_config;
    std::size_t jobs = 0;

    auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
    mms->add_option("--config", mms_config, "JSON study configuration")->required();
    auto* jobs_opt = mms->add_option("--jobs", jobs, "Parallel mesh runs");
    mms->add_flag("--dry-run", mms_opts.dry_run, "Validate and print the resolved plan");

    auto* scenario = app.add_subcommand("scenario", "Focused-ultrasound heating scenario");
    scenario->add_option("--config", scenario_config, "JSON scenario configuration")->required();
    scenario->add_flag("--dry-run", scenario_opts.dry_run, "Validate and print the resolved plan");

    thermofem::MeshgenOptions mesh;
    long long unit_square = 0;
    double focused = 0.0;
    auto* meshgen = app.add_subcommand("meshgen", "Write a built-in mesh in the native format");
    auto* us = meshgen->add_option("--unit-square", unit_square, "Unit square with N subdivisions");
    auto* fo = meshgen->add_option("--focused", focused, "Focused domain with element size H");
    meshgen->add_option("--output,-o", mesh.output, "Output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : thermofem::kExitConfig;
    }

    if (*mms) {
        if (*jobs_opt) mms_opts.jobs = jobs;
        return thermofem::cmd_mms(mms_config, mms_opts, std::cout, std::cerr);
    }
    if (*scenario) return thermofem::cmd_scenario(scenario_config, scenario_opts, std::cout, std::cerr);
    if (*us) mesh.unit_square = unit_square;
    if (*fo) mesh.focused_h = focused;
    return thermofem::cmd_meshgen(mesh, std::cout, std::cerr);
}
