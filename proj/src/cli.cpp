#include "thermofem/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "thermofem/config.hpp"
#include "thermofem/errors.hpp"
#include "thermofem/mesh.hpp"

namespace thermofem {

namespace {

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

int cmd_mms(const std::filesystem::path& config, const RunOptions& options, std::ostream& out,
            std::ostream& err) {
    MmsRunConfig run;
    const int parsed = guarded(err, [&] {
        run = load_mms_config(config);
        if (options.jobs) {
            if (*options.jobs == 0) throw ConfigError("--jobs must be at least 1");
            run.study.jobs = *options.jobs;
        }
        run.output_dir = resolve_output_dir(run.output_dir, run.name);
        return kExitOk;
    });
    if (parsed != kExitOk) return parsed;
    if (options.dry_run) {
        out << describe(run) << '\n';
        return kExitOk;
    }
    return guarded(err, [&] {
        std::filesystem::create_directories(run.output_dir);
        ErrorReport partial;
        ErrorReport report;
        int code = kExitOk;
        try {
            report = convergence_study(run.study, &partial);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            report = partial;
            code = kExitRuntime;
        }
        const auto csv = run.output_dir / (run.name + ".csv");
        const auto plot = run.output_dir / (run.name + "_plot.dat");
        auto csv_out = open_output(csv);
        write_error_csv(csv_out, report);
        auto plot_out = open_output(plot);
        write_plot_data(plot_out, report);
        out << std::setw(6) << "n" << std::setw(14) << "h" << std::setw(14) << "E_tau"
            << std::setw(14) << "L2" << std::setw(9) << "rate_E" << std::setw(9) << "rate_L2" << '\n';
        for (std::size_t i = 0; i < report.entries.size(); ++i) {
            const auto& e = report.entries[i];
            out << std::setw(6) << e.n << std::setw(14) << std::setprecision(5) << e.h
                << std::setw(14) << e.e_tau << std::setw(14) << e.l2;
            if (i > 0)
                out << std::setw(9) << std::setprecision(3) << report.rates_e[i - 1] << std::setw(9)
                    << report.rates_l2[i - 1];
            out << '\n';
        }
        out << "wrote " << csv.string() << " and " << plot.string() << '\n';
        return code;
    });
}

int cmd_scenario(const std::filesystem::path& config, const RunOptions& options, std::ostream& out,
                 std::ostream& err) {
    ScenarioConfig cfg;
    const int parsed = guarded(err, [&] {
        cfg = load_scenario_config(config);
        cfg.output_dir = resolve_output_dir(cfg.output_dir, cfg.name);
        return kExitOk;
    });
    if (parsed != kExitOk) return parsed;
    if (options.dry_run) {
        out << describe(cfg) << '\n';
        return kExitOk;
    }
    return guarded(err, [&] {
        const auto result = run_example(cfg);
        const auto& s = result.summary;
        out << s.name << ": " << s.num_elements << " elements, " << s.num_dofs << " dofs, "
            << s.time.size() << " steps\n"
            << std::setprecision(6) << "max |u_h| = " << s.max_u
            << ", max |theta_h| = " << s.max_theta << '\n';
        for (const auto& f : s.files) out << "wrote " << f.string() << '\n';
        return kExitOk;
    });
}

int cmd_meshgen(const MeshgenOptions& request, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (request.unit_square.has_value() == request.focused_h.has_value())
            throw ConfigError("give exactly one of --unit-square N or --focused H");
        Mesh mesh = [&] {
            if (request.unit_square) {
                if (*request.unit_square <= 0) throw ConfigError("--unit-square needs N >= 1");
                return unit_square_mesh(static_cast<std::size_t>(*request.unit_square));
            }
            const double h = *request.focused_h;
            if (!(h > 0.0 && h < FocusedDomain::radius))
                throw ConfigError("--focused needs 0 < H < 0.05");
            return focused_domain_mesh(h);
        }();
        if (request.output.has_parent_path()) std::filesystem::create_directories(request.output.parent_path());
        save_mesh(mesh, request.output);
        out << "wrote " << request.output.string() << ": " << mesh.num_vertices() << " vertices, "
            << mesh.num_triangles() << " triangles\n";
        return kExitOk;
    });
}

}  // namespace thermofem
