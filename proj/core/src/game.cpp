#include "oblique/game.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "oblique/domain.hpp"
#include "oblique/errors.hpp"
#include "oblique/format.hpp"

namespace oblique {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string pair_text(ModePair p) {
    return "(" + std::to_string(p.i + 1) + "," + std::to_string(p.j + 1) + ")";
}

/// Implicit step per mode pair on a field that may hold +-inf. A pair whose
/// children include an infinite value inherits it; mixed signs are undefined.
ModeMatrix continuation(const PathTree& tree, std::size_t node, const ModeField& next,
                        const Driver& driver, const StepOptions& opts) {
    const std::size_t m1 = next.m1(), m2 = next.m2();
    ModeMatrix anchor(m1, m2), inf_sign(m1, m2);
    std::vector<ModeMatrix> z(tree.dimension(), ModeMatrix(m1, m2));
    const double prob = tree.branch_probability();
    auto kids = tree.children(node);
    for (std::size_t k = 0; k < m1 * m2; ++k) {
        bool pos = false, neg = false;
        for (std::uint32_t c : kids) {
            const double v = next.at(c)[k];
            pos |= v == kInf;
            neg |= v == -kInf;
        }
        if (pos && neg)
            throw DataError("switched payoff undefined at node " + std::to_string(node) +
                            ": continuation mixes +inf and -inf");
        if (pos || neg) {
            inf_sign.values()[k] = pos ? 1.0 : -1.0;
            continue;
        }
        double e = 0.0;
        for (std::size_t b = 0; b < kids.size(); ++b) {
            const double v = next.at(kids[b])[k];
            e += prob * v;
            for (std::size_t p = 0; p < z.size(); ++p)
                z[p].values()[k] += prob * v * tree.increment(b, p) / tree.dt();
        }
        anchor.values()[k] = e;
    }
    std::size_t it = 0;
    ModeMatrix y = solve_implicit(tree.time(node), tree.dt(), anchor, z, driver, opts, it);
    for (std::size_t k = 0; k < m1 * m2; ++k)
        if (inf_sign.values()[k] != 0.0) y.values()[k] = inf_sign.values()[k] * kInf;
    return y;
}

void check_strategy(const FeedbackStrategy& s, Player player, const PathTree& tree, const GameSpec& spec) {
    if (s.player() != player || s.interior_nodes() != tree.interior_count() || s.m1() != spec.m1() ||
        s.m2() != spec.m2())
        throw UsageError("feedback strategy does not match the tree, the mode counts or the player");
}

void fill_leaves(const PathTree& tree, const GameSpec& spec, ModeField& U) {
    for (std::size_t leaf = tree.level_offset(tree.steps()); leaf < tree.node_count(); ++leaf)
        U.set(leaf, terminal_at(tree, spec.terminal, leaf));
}

}  // namespace

// ---------------------------------------------------------------------------

FeedbackStrategy::FeedbackStrategy(Player player, std::size_t interior_nodes, std::size_t m1, std::size_t m2)
    : player_(player), nodes_(interior_nodes), m1_(m1), m2_(m2), actions_(interior_nodes * m1 * m2) {
    if (m1 == 0 || m2 == 0 || m1 > 255 || m2 > 255) throw UsageError("feedback strategy: bad mode counts");
    for (std::size_t n = 0; n < nodes_; ++n)
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j)
                actions_[(n * m1 + i) * m2 + j] = static_cast<std::uint8_t>(player == Player::one ? i : j);
}

void FeedbackStrategy::set(std::size_t node, std::size_t i, std::size_t j, std::size_t mode) {
    if (node >= nodes_ || i >= m1_ || j >= m2_ || mode >= own_modes())
        throw UsageError("feedback strategy: entry out of range");
    actions_[(node * m1_ + i) * m2_ + j] = static_cast<std::uint8_t>(mode);
}

FeedbackStrategy FeedbackStrategy::stay(Player player, const PathTree& tree, std::size_t m1, std::size_t m2) {
    FeedbackStrategy s(player, tree.interior_count(), m1, m2);
    s.label = player == Player::one ? "I.stay" : "II.stay";
    return s;
}

FeedbackStrategy FeedbackStrategy::constant(Player player, const PathTree& tree, std::size_t m1,
                                            std::size_t m2, std::size_t mode) {
    FeedbackStrategy s(player, tree.interior_count(), m1, m2);
    if (mode >= s.own_modes()) throw UsageError("constant strategy: mode out of range");
    std::fill(s.actions_.begin(), s.actions_.end(), static_cast<std::uint8_t>(mode));
    s.label = (player == Player::one ? "I.constant_" : "II.constant_") + std::to_string(mode + 1);
    return s;
}

FeedbackStrategy FeedbackStrategy::random(Player player, const PathTree& tree, std::size_t m1, std::size_t m2,
                                          std::mt19937_64& rng, double switch_prob) {
    FeedbackStrategy s(player, tree.interior_count(), m1, m2);
    const std::size_t own = s.own_modes();
    s.label = player == Player::one ? "I.random" : "II.random";
    if (own < 2) return s;
    std::bernoulli_distribution flip(switch_prob);
    std::uniform_int_distribution<std::size_t> pick(0, own - 2);
    for (std::size_t k = 0; k < s.actions_.size(); ++k) {
        if (!flip(rng)) continue;
        const std::size_t cur = s.actions_[k];
        std::size_t target = pick(rng);
        if (target >= cur) ++target;
        s.actions_[k] = static_cast<std::uint8_t>(target);
    }
    return s;
}

FeedbackStrategy FeedbackStrategy::greedy(Player player, const PathTree& tree, const GameSpec& spec) {
    const std::size_t m1 = spec.m1(), m2 = spec.m2();
    FeedbackStrategy s(player, tree.interior_count(), m1, m2);
    s.label = player == Player::one ? "I.greedy" : "II.greedy";
    const std::vector<double> z0(tree.dimension(), 0.0);
    for (std::size_t node = 0; node < tree.interior_count(); ++node) {
        const double t = tree.time(node), rest = tree.horizon() - t;
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j) {
                std::size_t best = player == Player::one ? i : j;
                double best_v = 0.0;
                bool first = true;
                const std::size_t own = player == Player::one ? m1 : m2;
                for (std::size_t c = 0; c < own; ++c) {
                    const double v = player == Player::one
                                         ? spec.generator(t, 0.0, z0, c, j) * rest + spec.costs.k(i, c)
                                         : spec.generator(t, 0.0, z0, i, c) * rest - spec.costs.l(j, c);
                    const bool better = player == Player::one ? v < best_v : v > best_v;
                    if (first || better) {
                        best = c;
                        best_v = v;
                        first = false;
                    }
                }
                s.set(node, i, j, best);
            }
    }
    return s;
}

void FeedbackStrategy::write(std::ostream& os) const {
    os << "node,i,j,action\n";
    for (std::size_t n = 0; n < nodes_; ++n)
        for (std::size_t i = 0; i < m1_; ++i)
            for (std::size_t j = 0; j < m2_; ++j) os << n << ',' << i + 1 << ',' << j + 1 << ',' << action(n, i, j) + 1 << '\n';
}

FeedbackStrategy FeedbackStrategy::read(std::istream& is, Player player, std::size_t interior_nodes,
                                        std::size_t m1, std::size_t m2) {
    FeedbackStrategy s(player, interior_nodes, m1, m2);
    std::string line;
    if (!std::getline(is, line) || line != "node,i,j,action")
        throw DataError("strategy table: missing header 'node,i,j,action'");
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t n = 0, i = 0, j = 0, a = 0;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(ls >> n >> c1 >> i >> c2 >> j >> c3 >> a) || c1 != ',' || c2 != ',' || c3 != ',' || i == 0 ||
            j == 0 || a == 0)
            throw DataError("strategy table: malformed row " + std::to_string(row));
        s.set(n, i - 1, j - 1, a - 1);
    }
    return s;
}

// ---------------------------------------------------------------------------

Cascade run_cascade(std::size_t node, ModePair start, const FeedbackStrategy& a, const FeedbackStrategy& b,
                    const CostTables& costs) {
    const std::size_t m2 = a.m2();
    std::vector<double> seen(a.m1() * m2, std::numeric_limits<double>::quiet_NaN());
    Cascade c;
    ModePair cur = start;
    double cum = 0.0;
    seen[cur.i * m2 + cur.j] = 0.0;
    for (;;) {
        if (a.moves(node, cur.i, cur.j)) {
            const std::size_t t = a.action(node, cur.i, cur.j);
            const double k = costs.k(cur.i, t);
            c.cost_a += k;
            cum += k;
            ++c.switches_a;
            cur.i = t;
        } else if (b.moves(node, cur.i, cur.j)) {
            const std::size_t t = b.action(node, cur.i, cur.j);
            const double l = costs.l(cur.j, t);
            c.cost_b += l;
            cum -= l;
            ++c.switches_b;
            cur.j = t;
        } else {
            break;
        }
        double& mark = seen[cur.i * m2 + cur.j];
        if (!std::isnan(mark)) {
            const double loop = cum - mark;
            if (loop == 0.0)
                throw DataError("zero-cost switching loop through " + pair_text(cur) + " at node " +
                                std::to_string(node));
            c.infinite = loop > 0.0 ? 1 : -1;
            break;
        }
        mark = cum;
    }
    c.rest = cur;
    return c;
}

SwitchedValue eval_switched(const GameSpec& spec, const PathTree& tree, const FeedbackStrategy& a,
                            const FeedbackStrategy& b, const StepOptions& opts) {
    check_strategy(a, Player::one, tree, spec);
    check_strategy(b, Player::two, tree, spec);
    const Driver driver = Driver::raw(spec);
    check_contraction(tree, driver);
    const std::size_t m1 = spec.m1(), m2 = spec.m2(), nodes = tree.node_count();
    SwitchedValue out{ModeField(nodes, m1, m2), ModeField(nodes, m1, m2), ModeField(nodes, m1, m2)};
    fill_leaves(tree, spec, out.U);

    for_each_node_backward(tree, [&](std::size_t node) {
        const ModeMatrix S = continuation(tree, node, out.U, driver, opts);
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j) {
                const Cascade c = run_cascade(node, {i, j}, a, b, spec.costs);
                out.dA(node, i, j) = c.cost_a;
                out.dB(node, i, j) = c.cost_b;
                out.U(node, i, j) = c.infinite ? c.infinite * kInf : c.cost_a - c.cost_b + S(c.rest.i, c.rest.j);
            }
    });
    return out;
}

PathRecord simulate_path(const PathTree& tree, const FeedbackStrategy& a, const FeedbackStrategy& b,
                         const CostTables& costs, ModePair start, std::size_t leaf_index) {
    if (tree.recombining()) throw UsageError("simulate_path needs the non-recombining tree");
    if (leaf_index >= tree.level_size(tree.steps())) throw UsageError("simulate_path: leaf out of range");
    std::vector<std::size_t> digits(tree.steps());
    for (std::size_t t = tree.steps(), q = leaf_index; t-- > 0; q /= tree.branching())
        digits[t] = q % tree.branching();

    PathRecord rec;
    ModePair cur = start;
    std::size_t node = 0;
    for (std::size_t t = 0; t < tree.steps(); ++t) {
        const Cascade c = run_cascade(node, cur, a, b, costs);
        rec.A += c.cost_a;
        rec.B += c.cost_b;
        rec.switches_a += c.switches_a;
        rec.switches_b += c.switches_b;
        if (c.infinite) {
            rec.infinite = c.infinite;
            break;
        }
        cur = c.rest;
        rec.rest.push_back(cur);
        node = tree.child(node, digits[t]);
    }
    rec.terminal_modes = cur;
    return rec;
}

std::size_t remove_switching_loops(FeedbackStrategy& s, const FeedbackStrategy& opponent) {
    const bool s_is_a = s.player() == Player::one;
    const std::size_t m1 = s.m1(), m2 = s.m2();
    std::size_t resets = 0;
    std::vector<char> seen(m1 * m2);
    for (std::size_t node = 0; node < s.interior_nodes(); ++node)
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j)
                for (;;) {
                    const FeedbackStrategy& a = s_is_a ? s : opponent;
                    const FeedbackStrategy& b = s_is_a ? opponent : s;
                    std::fill(seen.begin(), seen.end(), 0);
                    ModePair cur{i, j}, last_own{m1, m2};
                    bool loop = false;
                    seen[i * m2 + j] = 1;
                    for (;;) {
                        const bool a_moves = a.moves(node, cur.i, cur.j);
                        if (!a_moves && !b.moves(node, cur.i, cur.j)) break;
                        if (a_moves == s_is_a) last_own = cur;
                        if (a_moves)
                            cur.i = a.action(node, cur.i, cur.j);
                        else
                            cur.j = b.action(node, cur.i, cur.j);
                        if (seen[cur.i * m2 + cur.j]) {
                            loop = true;
                            break;
                        }
                        seen[cur.i * m2 + cur.j] = 1;
                    }
                    if (!loop) break;
                    if (last_own.i == m1) break;  // the opponent loops on its own
                    s.set(node, last_own.i, last_own.j, s_is_a ? last_own.i : last_own.j);
                    ++resets;
                }
    return resets;
}

// ---------------------------------------------------------------------------

SaddleStrategies extract_saddle(const PathTree& tree, const ModeField& Y, const CostTables& costs, double tol,
                                TieRule tie) {
    const std::size_t m1 = Y.m1(), m2 = Y.m2();
    SaddleStrategies s{FeedbackStrategy(Player::one, tree.interior_count(), m1, m2),
                       FeedbackStrategy(Player::two, tree.interior_count(), m1, m2)};
    s.a.label = "I.saddle";
    s.b.label = "II.saddle";
    for (std::size_t node = 0; node < tree.interior_count(); ++node) {
        const ModeMatrix y = Y.matrix(node);
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j) {
                std::size_t ti = i, tj = j;
                double up = kInf, lo = -kInf;
                for (std::size_t ip = 0; ip < m1; ++ip)
                    if (ip != i && y(ip, j) + costs.k(i, ip) < up) {
                        up = y(ip, j) + costs.k(i, ip);
                        ti = ip;
                    }
                for (std::size_t jp = 0; jp < m2; ++jp)
                    if (jp != j && y(i, jp) - costs.l(j, jp) > lo) {
                        lo = y(i, jp) - costs.l(j, jp);
                        tj = jp;
                    }
                const bool fire_a = m1 > 1 && y(i, j) >= up - tol;
                const bool fire_b = m2 > 1 && y(i, j) <= lo + tol;
                s.a.set(node, i, j, fire_a ? ti : i);
                s.b.set(node, i, j, fire_b && !(fire_a && tie == TieRule::literal) ? tj : j);
            }
    }
    return s;
}

double SaddleReport::max_value_error() const {
    double e = 0.0;
    for (std::size_t k = 0; k < Y_root.size(); ++k) e = std::max(e, std::abs(U_star.values()[k] - Y_root.values()[k]));
    return e;
}

namespace {

/// Random members are cleared of switching loops against the saddle opponent:
/// a loop sends the payoff to +-inf and would satisfy the inequality vacuously.
std::vector<FeedbackStrategy> catalog(Player player, const PathTree& tree, const GameSpec& spec,
                                      const SaddleOptions& opts, const SaddleStrategies& star,
                                      std::mt19937_64& rng) {
    const std::size_t m1 = spec.m1(), m2 = spec.m2();
    std::vector<FeedbackStrategy> out;
    out.push_back(FeedbackStrategy::stay(player, tree, m1, m2));
    const std::size_t own = player == Player::one ? m1 : m2;
    for (std::size_t c = 0; c < own; ++c) out.push_back(FeedbackStrategy::constant(player, tree, m1, m2, c));
    out.push_back(FeedbackStrategy::greedy(player, tree, spec));
    for (std::size_t r = 0; r < opts.catalog_size; ++r) {
        out.push_back(FeedbackStrategy::random(player, tree, m1, m2, rng, opts.switch_prob));
        out.back().label += "_" + std::to_string(r + 1);
        remove_switching_loops(out.back(), player == Player::one ? star.b : star.a);
    }
    return out;
}

std::string dump(const FeedbackStrategy& s) {
    std::ostringstream os;
    s.write(os);
    return os.str();
}

}  // namespace

SaddleReport verify_saddle(const GameSpec& spec, const PathTree& tree, const ModeField& Y,
                           const SaddleOptions& opts) {
    const SaddleStrategies star = extract_saddle(tree, Y, spec.costs, opts.trigger_tol, opts.tie);
    SaddleReport rep;
    rep.tol = opts.tol;
    rep.Y_root = Y.matrix(0);
    rep.U_star = eval_switched(spec, tree, star.a, star.b, opts.step).U.matrix(0);
    const std::size_t m1 = spec.m1(), m2 = spec.m2();

    for (std::size_t i = 0; i < m1; ++i)
        for (std::size_t j = 0; j < m2; ++j) {
            const double err = std::abs(rep.U_star(i, j) - rep.Y_root(i, j));
            if (!(err <= opts.tol)) {
                std::ostringstream os;
                os << "value identity fails at start " << pair_text({i, j}) << ": U*=" << fmt_num(rep.U_star(i, j))
                   << ", Y=" << fmt_num(rep.Y_root(i, j));
                rep.violations.push_back({os.str(), dump(star.a) + dump(star.b)});
            }
        }

    std::mt19937_64 rng(opts.seed);
    const auto deviations_b = catalog(Player::two, tree, spec, opts, star, rng);
    const auto deviations_a = catalog(Player::one, tree, spec, opts, star, rng);
    auto check = [&](const FeedbackStrategy& dev, const ModeMatrix& U) {
        for (std::size_t i = 0; i < m1; ++i)
            for (std::size_t j = 0; j < m2; ++j) {
                SaddleRow row{dev.label, dev.player(), {i, j}, U(i, j), 0.0};
                row.slack = dev.player() == Player::two ? rep.Y_root(i, j) - U(i, j) : U(i, j) - rep.Y_root(i, j);
                if (std::isnan(row.slack) || row.slack < -opts.tol) {
                    std::ostringstream os;
                    os << (dev.player() == Player::two ? "U^{a*,b}" : "U^{a,b*}") << " violates the saddle "
                       << "inequality for " << dev.label << " at start " << pair_text({i, j}) << ": U="
                       << fmt_num(U(i, j)) << ", Y=" << fmt_num(rep.Y_root(i, j));
                    rep.violations.push_back({os.str(), dump(dev)});
                }
                rep.rows.push_back(std::move(row));
            }
    };
    for (const auto& b : deviations_b) check(b, eval_switched(spec, tree, star.a, b, opts.step).U.matrix(0));
    for (const auto& a : deviations_a) check(a, eval_switched(spec, tree, a, star.b, opts.step).U.matrix(0));
    return rep;
}

std::size_t strategy_count(Player player, const PathTree& tree, std::size_t m1, std::size_t m2) {
    const std::size_t own = player == Player::one ? m1 : m2;
    const std::size_t entries = tree.interior_count() * m1 * m2;
    std::size_t count = 1;
    for (std::size_t e = 0; e < entries; ++e) {
        if (own != 0 && count > std::numeric_limits<std::size_t>::max() / own)
            return std::numeric_limits<std::size_t>::max();
        count *= own;
    }
    return count;
}

void for_each_strategy(Player player, const PathTree& tree, std::size_t m1, std::size_t m2, std::size_t cap,
                       const std::function<void(const FeedbackStrategy&)>& fn) {
    const std::size_t count = strategy_count(player, tree, m1, m2);
    if (count > cap)
        throw SizingError("strategy enumeration: " +
                          (count == std::numeric_limits<std::size_t>::max() ? std::string("more than 2^64")
                                                                            : std::to_string(count)) +
                          " feedback tables exceed the cap of " + std::to_string(cap));
    FeedbackStrategy s(player, tree.interior_count(), m1, m2);
    const std::size_t own = s.own_modes();
    for (std::size_t k = 0; k < s.entries(); ++k) s.set_raw(k, 0);
    s.label = player == Player::one ? "I.table" : "II.table";
    for (std::size_t n = 0; n < count; ++n) {
        fn(s);
        for (std::size_t k = 0; k < s.entries(); ++k) {
            const std::size_t v = s.raw(k) + 1;
            if (v < own) {
                s.set_raw(k, v);
                break;
            }
            s.set_raw(k, 0);
        }
    }
}

ExhaustiveSaddle exhaustive_saddle(const GameSpec& spec, const PathTree& tree, const ModeField& Y,
                                   double trigger_tol, std::size_t cap, const StepOptions& opts,
                                   TieRule tie) {
    const SaddleStrategies star = extract_saddle(tree, Y, spec.costs, trigger_tol, tie);
    const std::size_t m1 = spec.m1(), m2 = spec.m2();
    ExhaustiveSaddle out{Y.matrix(0), ModeMatrix(m1, m2, -kInf), ModeMatrix(m1, m2, kInf), 0, 0};
    for_each_strategy(Player::two, tree, m1, m2, cap, [&](const FeedbackStrategy& b) {
        const ModeMatrix u = eval_switched(spec, tree, star.a, b, opts).U.matrix(0);
        for (std::size_t k = 0; k < u.size(); ++k)
            out.max_over_b.values()[k] = std::max(out.max_over_b.values()[k], u.values()[k]);
        ++out.tables_b;
    });
    for_each_strategy(Player::one, tree, m1, m2, cap, [&](const FeedbackStrategy& a) {
        const ModeMatrix u = eval_switched(spec, tree, a, star.b, opts).U.matrix(0);
        for (std::size_t k = 0; k < u.size(); ++k)
            out.min_over_a.values()[k] = std::min(out.min_over_a.values()[k], u.values()[k]);
        ++out.tables_a;
    });
    return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Node problem of the lower-reflected system: forced Player-I moves and
/// optional Player-II moves with a stop option at the step value.
void lower_node(std::size_t node, const FeedbackStrategy& a, const CostTables& costs, const ModeMatrix& stop,
                LowerPush push, std::span<double> out) {
    const std::size_t m1 = stop.rows(), m2 = stop.cols(), n = m1 * m2;
    std::vector<char> forced(n), fixed(n, 0);
    std::vector<std::size_t> target(n);
    for (std::size_t i = 0; i < m1; ++i)
        for (std::size_t j = 0; j < m2; ++j) {
            forced[i * m2 + j] = a.moves(node, i, j);
            target[i * m2 + j] = a.action(node, i, j) * m2 + j;
        }
    std::vector<double> W(n);
    // Pure Player-I switching loops cost sum k > 0 each round.
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t cur = s, hops = 0;
        while (forced[cur] && hops <= n) {
            cur = target[cur];
            ++hops;
        }
        if (forced[cur]) {
            W[s] = kInf;
            fixed[s] = 1;
        } else {
            W[s] = forced[s] ? -kInf : stop.values()[s];
        }
    }
    auto relax = [&](std::size_t s) {
        const std::size_t i = s / m2, j = s % m2;
        if (forced[s]) return costs.k(i, target[s] / m2) + W[target[s]];
        double v = stop.values()[s];
        if (push == LowerPush::own)
            for (std::size_t jp = 0; jp < m2; ++jp)
                if (jp != j) v = std::max(v, W[i * m2 + jp] - costs.l(j, jp));
        return v;
    };
    // Longest paths: n rounds settle every finite value; states still rising
    // afterwards sit on or reach a positive cycle.
    for (std::size_t round = 0; round < 2 * n + 1; ++round) {
        bool changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            if (fixed[s]) continue;
            const double v = relax(s);
            if (v > W[s]) {
                W[s] = round >= n ? kInf : v;
                changed = true;
            }
        }
        if (!changed) break;
    }
    std::copy(W.begin(), W.end(), out.begin());
}

}  // namespace

ModeField solve_lower_reflected(const GameSpec& spec, const PathTree& tree, const FeedbackStrategy& a,
                                LowerPush push, const RbsdeSolution* frozen, const StepOptions& opts) {
    check_strategy(a, Player::one, tree, spec);
    if (push == LowerPush::frozen && (!frozen || frozen->dL.nodes() != tree.node_count()))
        throw UsageError("solve_lower_reflected: frozen mode needs a reflected solution on the same tree");
    const Driver driver = Driver::raw(spec);
    check_contraction(tree, driver);
    ModeField U(tree.node_count(), spec.m1(), spec.m2());
    fill_leaves(tree, spec, U);
    for_each_node_backward(tree, [&](std::size_t node) {
        ModeMatrix stop = continuation(tree, node, U, driver, opts);
        if (push == LowerPush::frozen)
            for (std::size_t k = 0; k < stop.size(); ++k) stop.values()[k] += frozen->dL.at(node)[k];
        lower_node(node, a, spec.costs, stop, push, U.at(node));
    });
    return U;
}

ModeMatrix brute_force_values(const GameSpec& spec, const PathTree& tree, std::size_t cap, const StepOptions& opts) {
    ModeMatrix best(spec.m1(), spec.m2(), kInf);
    for_each_strategy(Player::one, tree, spec.m1(), spec.m2(), cap, [&](const FeedbackStrategy& a) {
        const ModeField U = solve_lower_reflected(spec, tree, a, LowerPush::own, nullptr, opts);
        for (std::size_t k = 0; k < best.size(); ++k) best.values()[k] = std::min(best.values()[k], U.at(0)[k]);
    });
    return best;
}

double brute_force_value(const GameSpec& spec, const PathTree& tree, ModePair start, std::size_t cap,
                         const StepOptions& opts) {
    if (start.i >= spec.m1() || start.j >= spec.m2()) throw UsageError("brute_force_value: start out of range");
    return brute_force_values(spec, tree, cap, opts)(start.i, start.j);
}

void write_saddle_csv(std::ostream& os, const SaddleReport& r) {
    os << "strategy,deviator,i,j,value,slack\n";
    for (const SaddleRow& row : r.rows)
        os << row.strategy << ',' << (row.deviator == Player::one ? "I" : "II") << ',' << row.start.i + 1 << ','
           << row.start.j + 1 << ',' << fmt_num(row.value) << ',' << fmt_num(row.slack) << '\n';
}

}  // namespace oblique
