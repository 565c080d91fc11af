#include "sdk/resonance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sdk/errors.hpp"

namespace sdk {

//
// Rational
//

Rational::Rational(long long n, long long d)
{
    if (d == 0) throw Error(ErrorKind::InvalidOrders, "zero denominator", "orders");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const long long g = std::gcd(n, d);
    num = g ? n / g : n;
    den = g ? d / g : d;
}

namespace {

long long parse_int(std::string_view s)
{
    long long v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || p != end) {
        throw Error(ErrorKind::InvalidOrders, "cannot parse order '" + std::string(s) + "'",
                    "orders");
    }
    return v;
}

} // namespace

Rational Rational::parse(std::string_view text)
{
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        return {parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))};
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        const std::string_view frac = text.substr(dot + 1);
        if (frac.size() > 12) {
            throw Error(ErrorKind::InvalidOrders, "too many decimals in order", "orders");
        }
        long long scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        const std::string_view whole = text.substr(0, dot);
        const bool neg = !whole.empty() && whole.front() == '-';
        const long long w = (whole.empty() || whole == "-") ? 0 : parse_int(whole);
        const long long f = frac.empty() ? 0 : parse_int(frac);
        if (f < 0) throw Error(ErrorKind::InvalidOrders, "malformed order", "orders");
        return {w * scale + (neg ? -f : f), scale};
    }
    return {parse_int(text), 1};
}

std::string Rational::str() const
{
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }

bool operator<(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }

//
// Comb resonance
//

void CombSpec::validate() const
{
    const std::pair<const char*, double> fields[] = {
        {"f_rep", f_rep}, {"f_aom", f_aom}, {"f_hf", f_hf}};
    for (const auto& [key, v] : fields) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw Error(ErrorKind::InvalidComb, std::string(key) + " must be positive", key);
        }
    }
    const double twice = 2.0 * f_hf / f_rep;
    if (std::abs(twice - std::round(twice)) <= 1e-9 * twice) {
        throw Error(ErrorKind::InvalidComb,
                    "f_hf is an integer or half-integer multiple of f_rep", "f_hf");
    }
}

ResonanceSolution comb_resonance(const CombSpec& spec)
{
    spec.validate();
    ResonanceSolution best;
    bool have = false;
    // Plus first so ties resolve toward it; within a branch the smaller n.
    for (SignBranch sign : {SignBranch::Plus, SignBranch::Minus}) {
        // Plus: f_hf = n f_rep - f_aom, Minus: f_hf = n f_rep + f_aom.
        const double target = resonance_frequency(spec, sign);
        const long long lo = static_cast<long long>(std::floor(target / spec.f_rep));
        for (long long n : {lo, lo + 1}) {
            if (n < 1) continue;
            const double residual = spec.f_hf - (n * spec.f_rep - branch_sign(sign) * spec.f_aom);
            if (!have || std::abs(residual) < std::abs(best.residual)) {
                best = {n, sign, residual};
                have = true;
            }
        }
    }
    if (!have) throw Error(ErrorKind::InvalidComb, "no positive comb order", "f_hf");
    return best;
}

double resonance_frequency(const CombSpec& spec, SignBranch sign)
{
    return spec.f_hf + branch_sign(sign) * spec.f_aom;
}

double delay_from_order(Rational n, const CombSpec& spec, SignBranch sign)
{
    if (n.num <= 0) throw Error(ErrorKind::InvalidOrders, "order must be positive", "orders");
    const double f = resonance_frequency(spec, sign);
    if (!(f > 0.0)) throw Error(ErrorKind::InvalidComb, "non-positive beat frequency", "f_aom");
    return n.value() / f;
}

//
// Eight-pulse plan
//

DelayPlan plan_eight_pulse_train(const std::array<Rational, 3>& orders, const CombSpec& spec,
                                 SignBranch sign)
{
    for (const auto& o : orders) {
        if (o.num <= 0) throw Error(ErrorKind::InvalidOrders, "orders must be positive", "orders");
    }
    if (!orders[0].is_half_integer()) {
        throw Error(ErrorKind::InvalidOrders,
                    "first order must be a half-integer, got " + orders[0].str(), "orders");
    }
    if (!orders[1].is_integer() || !orders[2].is_integer()) {
        throw Error(ErrorKind::InvalidOrders, "second and third orders must be integers",
                    "orders");
    }

    struct Entry {
        Rational order;
        int arms;
    };
    std::vector<Entry> entries;
    for (int mask = 0; mask < 8; ++mask) {
        Rational total(0);
        for (int k = 0; k < 3; ++k) {
            if (mask & (1 << k)) total = total + orders[k];
        }
        entries.push_back({total, mask});
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.order < b.order; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].order == entries[i - 1].order) {
            throw Error(ErrorKind::InvalidOrders, "two pulses would arrive at the same time",
                        "orders");
        }
    }

    DelayPlan plan;
    plan.orders = orders;
    plan.sign = sign;
    for (int k = 0; k < 3; ++k) plan.delays[k] = delay_from_order(orders[k], spec, sign);
    for (const auto& e : entries) {
        double t = 0.0;
        for (int k = 0; k < 3; ++k) {
            if (e.arms & (1 << k)) t += plan.delays[k];
        }
        plan.pulse_times.push_back(t);
        plan.phase_offsets.push_back((e.arms & 1) ? kPi : 0.0);
        plan.arms.push_back(e.arms);
    }
    return plan;
}

TrainSchedule schedule_from_plan(const DelayPlan& plan, const CombSpec& spec, double total_area,
                                 double phi_0)
{
    TrainSchedule s;
    s.omega_A = kTwoPi * spec.f_aom;
    s.phi_0 = phi_0;
    s.sign = plan.sign;
    const double theta = total_area / static_cast<double>(plan.pulse_times.size());
    for (std::size_t i = 0; i < plan.pulse_times.size(); ++i) {
        s.pulses.push_back({plan.pulse_times[i], theta, plan.phase_offsets[i]});
    }
    return s;
}

//
// Validation
//

ScheduleValidation validate_schedule(const TrainSchedule& schedule, const CombSpec& spec,
                                     double tolerance)
{
    ScheduleValidation rep;
    rep.tolerance = tolerance;
    rep.pass = true;
    const double f = resonance_frequency(spec, schedule.sign);
    const double s = branch_sign(schedule.sign);
    for (std::size_t i = 1; i < schedule.pulses.size(); ++i) {
        const auto& a = schedule.pulses[i - 1];
        const auto& b = schedule.pulses[i];
        GapReport g;
        g.dt = b.arrival_time - a.arrival_time;
        g.cycles = f * g.dt + s * (b.phase_offset - a.phase_offset) / kTwoPi;
        g.distance = std::abs(g.cycles - std::round(g.cycles));
        g.pass = g.distance <= tolerance;
        rep.max_distance = std::max(rep.max_distance, g.distance);
        rep.pass = rep.pass && g.pass;
        rep.gaps.push_back(g);
    }
    if (rep.gaps.empty()) rep.pass = false;
    return rep;
}

} // namespace sdk
