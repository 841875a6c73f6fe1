#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "commands.hpp"
#include "common.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Top-of-book queue model: empirical curves, series solver, "
                 "Monte Carlo and calibration"};
    app.require_subcommand(1);
    lobq::cli::setup_curves(app);
    lobq::cli::setup_solve(app);
    lobq::cli::setup_simulate(app);
    lobq::cli::setup_calibrate(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return lobq::cli::kExitInput;
    } catch (const lobq::cli::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lobq::cli::kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lobq::cli::kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lobq::cli::kExitNumeric;
    }
    return 0;
}
