#pragma once

namespace CLI {
class App;
}

namespace lobq::cli {

// Each setup_* registers one subcommand with its options and callback; the
// callbacks throw InputError (exit 2) or let numerical errors escape (exit 3).
void setup_curves(CLI::App& app);
void setup_solve(CLI::App& app);
void setup_simulate(CLI::App& app);
void setup_calibrate(CLI::App& app);

}  // namespace lobq::cli
