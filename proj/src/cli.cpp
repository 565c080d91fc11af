#include "sdk/cli.hpp"

#include <functional>
#include <map>

#include "json.hpp"
#include "sdk/errors.hpp"
#include "sdk/output.hpp"

namespace sdk {

namespace {

struct Context {
    const RunConfig& config;
    const RunOptions& options;
    OutputSession& session;
    std::string subcommand;
    std::vector<std::string> files;

    void emit(const std::string& file, const Table& table,
              std::vector<std::pair<std::string, std::string>> extra = {})
    {
        OutputMeta meta{subcommand, config.digest(), options.seed, std::move(extra)};
        session.write(file, render_table(table, meta));
        files.push_back(file);
    }
};

std::string num(double x) { return format_number(x); }

const char* sign_name(SignBranch s) { return s == SignBranch::Plus ? "plus" : "minus"; }

void run_schedule(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const CombSpec comb = c.comb();
    const DelayPlan plan = plan_eight_pulse_train(c.train_orders, comb, c.sign);
    const ResonanceSolution res = comb_resonance(comb);

    Table t({{"key", "-"}, {"value", "-"}, {"unit", "-"}});
    auto row = [&t](const std::string& k, double v, const std::string& u) {
        t.add_row({k, v, u});
    };
    for (int k = 0; k < 3; ++k) {
        row("order_" + std::to_string(k + 1), plan.orders[k].value(), "cycles");
    }
    for (int k = 0; k < 3; ++k) {
        row("delay_" + std::to_string(k + 1), plan.delays[k] * 1e12, "ps");
    }
    for (std::size_t i = 0; i < plan.pulse_times.size(); ++i) {
        row("pulse_time_" + std::to_string(i), plan.pulse_times[i] * 1e12, "ps");
    }
    for (std::size_t i = 0; i < plan.phase_offsets.size(); ++i) {
        row("phase_offset_" + std::to_string(i), plan.phase_offsets[i] / kPi, "pi");
    }
    row("duration", plan.duration(), "s");
    row("mean_spacing", plan.mean_spacing() * 1e12, "ps");
    row("effective_rate", plan.effective_rate(), "Hz");
    row("comb_order", static_cast<double>(res.n), "1");
    row("comb_sign", branch_sign(res.sign), "1");
    row("comb_residual", res.residual, "Hz");
    ctx.emit("schedule.csv", t,
             {{"orders", plan.orders[0].str() + " " + plan.orders[1].str() + " " +
                             plan.orders[2].str()},
              {"sign", sign_name(c.sign)}});
}

void run_kick(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const HilbertDims dims = c.dims();
    const KickPhysics physics = c.physics();
    const TrainSchedule train = c.sdk_train();
    const DenseOperator op = train_operator(train, physics, dims);
    const SpinOscState out = op.apply(SpinOscState::basis(dims, Spin::Down, 0));

    Table t({{"spin", "-"}, {"fock_n", "1"}, {"population", "1"}});
    for (Spin s : {Spin::Down, Spin::Up}) {
        const auto pops = out.fock_populations(s);
        for (int n = 0; n < dims.fock(); ++n) {
            t.add_row({std::string(s == Spin::Down ? "down" : "up"), static_cast<long long>(n),
                       pops[n]});
        }
    }
    const cplx mean = out.mean_lowering();
    ctx.emit("kick.csv", t,
             {{"initial_state", "|down,0>"},
              {"pulses", std::to_string(train.pulses.size())},
              {"flip_probability", num(out.spin_population(Spin::Up))},
              {"mean_a_real", num(mean.real())},
              {"mean_a_imag", num(mean.imag())}});
}

void run_fidelity(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const HilbertDims dims = c.dims();
    const KickPhysics physics = c.physics();
    const CombSpec comb = c.comb();
    const ThermalEnsemble thermal =
        thermal_weights(c.n_bar, dims.invariant_levels(), c.truncation_budget);
    const double spacing = delay_from_order(c.equal_spacing_order, comb, c.sign);

    auto score = [&](const TrainSchedule& s, Table& t, long long m) {
        const TrainFidelity f = train_fidelity(s, physics, dims);
        const DenseOperator op = train_operator(s, physics, dims);
        const DenseOperator ideal = ideal_sdk_operator(physics, f.phi_prime, s.sign, dims);
        const double th = sdk_fidelity(op, ideal, thermal).fidelity;
        t.add_row({m, f.report.fidelity, th, f.phi_prime, f.flip_probability});
    };
    const std::vector<Column> cols{{"m", "count"},
                                   {"fidelity", "1"},
                                   {"thermal_fidelity", "1"},
                                   {"phi_prime_rad", "rad"},
                                   {"flip_probability", "1"}};

    Table equal(cols);
    for (int m : c.fidelity_pulse_counts) {
        score(equally_spaced_train(m, spacing, c.train_total_area_rad, kTwoPi * c.f_aom_hz,
                                   c.phi0_rad, c.sign),
              equal, m);
    }
    ctx.emit("fidelity.csv", equal,
             {{"schedule", "equally spaced, order " + c.equal_spacing_order.str()},
              {"spacing_s", num(spacing)},
              {"metric", "worst case over |down,0>,|up,0>,|+,0>,|-,0>"},
              {"thermal_n_bar", num(c.n_bar)}});

    const TrainSchedule planned = c.sdk_train();
    Table plan(cols);
    score(planned, plan, static_cast<long long>(planned.pulses.size()));
    ctx.emit("fidelity_plan.csv", plan,
             {{"schedule", c.custom_pulse_times_s.empty() ? "delay-line plan" : "custom"},
              {"duration_s", num(planned.duration())},
              {"phi0_rad", num(c.phi0_rad)}});
}

void run_ramsey(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const ExperimentConfig e = c.experiment();
    const double delay = c.kick_delay();
    const auto points = ramsey_scan(e, delay);
    Table t({{"delta_hz", "Hz"}, {"p_up", "1"}});
    for (const auto& p : points) t.add_row({p.delta, p.p_up});
    ctx.emit("ramsey.csv", t,
             {{"kick_delay_s", num(delay)},
              {"fit_contrast", num(fringe_contrast(points, e.ramsey_separation))}});
}

void run_revival(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const ExperimentConfig e = c.experiment();
    const int total = c.revival_periods * c.revival_points_per_period;
    std::vector<double> grid;
    for (int k = 0; k <= total; ++k) {
        grid.push_back(c.trap_period() * k / static_cast<double>(c.revival_points_per_period));
    }
    const ContrastCurve curve = contrast_vs_delay(e, grid, ctx.options.threads);
    Table t({{"T_s", "s"}, {"contrast", "1"}});
    for (const auto& p : curve.points) t.add_row({p.kick_delay, p.contrast});
    ctx.emit("revival.csv", t,
             {{"trap_period_s", num(c.trap_period())},
              {"contrast_scale", num(c.contrast_scale)}});
}

void run_diffraction(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const HilbertDims dims = c.dims();
    const KickPhysics physics = c.physics();
    Table orders({{"theta_rad", "rad"},
                  {"n", "1"},
                  {"bessel_population", "1"},
                  {"fourier_population", "1"},
                  {"projection_population", "1"},
                  {"unflipped_population", "1"}});
    Table summary({{"theta_rad", "rad"},
                   {"flip_probability", "1"},
                   {"bessel_odd_sum", "1"},
                   {"bessel_total", "1"},
                   {"flip_probability_phase0", "1"},
                   {"max_odd_unflipped", "1"}});
    for (double theta : c.diffraction_thetas_rad) {
        const DiffractionTable d = kapitza_dirac_populations(theta, physics, dims);
        for (const auto& o : d.orders) {
            orders.add_row({theta, static_cast<long long>(o.n), o.bessel, o.fourier, o.projection,
                            o.unflipped});
        }
        summary.add_row({theta, d.flip_probability, d.bessel_odd, d.bessel_total,
                         d.flip_probability_phase0, d.max_odd_unflipped});
    }
    ctx.emit("diffraction.csv", orders, {{"initial_state", "|down,0>"}});
    ctx.emit("diffraction_summary.csv", summary,
             {{"flip_average", "uniform over standing-wave phase"}});
}

void run_validate(Context& ctx)
{
    const RunConfig& c = ctx.config;
    const TrainSchedule s = c.sdk_train();
    const ScheduleValidation v = validate_schedule(s, c.comb());
    Table t({{"gap", "1"}, {"dt_s", "s"}, {"cycles", "1"}, {"distance", "1"}, {"pass", "bool"}});
    for (std::size_t i = 0; i < v.gaps.size(); ++i) {
        const auto& g = v.gaps[i];
        t.add_row({static_cast<long long>(i), g.dt, g.cycles, g.distance,
                   static_cast<long long>(g.pass ? 1 : 0)});
    }
    ctx.emit("validate.csv", t,
             {{"tolerance_cycles", num(v.tolerance)},
              {"max_distance", num(v.max_distance)},
              {"pass", v.pass ? "true" : "false"}});
}

const std::map<std::string, std::function<void(Context&)>>& runners()
{
    static const std::map<std::string, std::function<void(Context&)>> m{
        {"schedule", run_schedule}, {"kick", run_kick},       {"fidelity", run_fidelity},
        {"ramsey", run_ramsey},     {"revival", run_revival}, {"diffraction", run_diffraction},
        {"validate", run_validate},
    };
    return m;
}

} // namespace

std::vector<std::string> subcommand_names()
{
    return {"schedule", "kick", "fidelity", "ramsey", "revival", "diffraction", "validate"};
}

std::vector<std::filesystem::path> run_subcommand(const std::string& name, const RunConfig& config,
                                                  const RunOptions& options)
{
    const auto& table = runners();
    auto it = table.find(name);
    if (it == table.end()) {
        throw Error(ErrorKind::InvalidArgument, "unknown subcommand '" + name + "'", "subcommand");
    }
    if (options.threads < 1) {
        throw Error(ErrorKind::RangeError, "threads must be >= 1", "threads");
    }
    config.validate();
    OutputSession session(options.out_dir);
    Context ctx{config, options, session, name, {}};
    it->second(ctx);

    nlohmann::json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["subcommand"] = name;
    manifest["config"] = options.config_source;
    manifest["config_digest"] = config.digest();
    manifest["seed"] = options.seed;
    manifest["outputs"] = ctx.files;
    session.write("manifest.json", manifest.dump(2) + "\n");
    session.commit();
    return session.written();
}

} // namespace sdk
