#include "injurycast/deephit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "injurycast/csv.hpp"
#include "injurycast/errors.hpp"
#include "injurycast/features.hpp"

namespace injurycast {

namespace {

constexpr int kCheckpointVersion = 1;

double log_sum_exp(std::span<const double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

double activate(Activation a, double v) {
    return a == Activation::relu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
}

double activate_grad(Activation a, double pre) {
    if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(pre);
    return 1.0 - t * t;
}

/// Per-sample forward state kept for backprop.
struct Trace {
    std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
    std::vector<std::vector<double>> pre;     // hidden pre-activations
    std::vector<std::vector<double>> keep;    // dropout multipliers (empty: none)
    std::vector<double> logits;
};

void dense(const DenseLayer& layer, std::span<const double> x, std::vector<double>& y) {
    y.assign(static_cast<std::size_t>(layer.out), 0.0);
    for (int o = 0; o < layer.out; ++o) {
        const double* w = &layer.weight[static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in)];
        double acc = layer.bias[static_cast<std::size_t>(o)];
        for (int i = 0; i < layer.in; ++i) acc += w[i] * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(o)] = acc;
    }
}

Trace trace_forward(const DeepHitNet& net, std::span<const double> x, std::mt19937_64* rng) {
    const auto& layers = net.layers();
    const auto& cfg = net.config();
    Trace tr;
    tr.inputs.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        std::vector<double> z;
        dense(layers[l], tr.inputs.back(), z);
        std::vector<double> h(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) h[k] = activate(cfg.activation, z[k]);
        std::vector<double> keep;
        if (rng && cfg.dropout_rate > 0.0) {
            std::bernoulli_distribution drop(cfg.dropout_rate);
            const double scale = 1.0 / (1.0 - cfg.dropout_rate);
            keep.resize(h.size());
            for (std::size_t k = 0; k < h.size(); ++k) {
                keep[k] = drop(*rng) ? 0.0 : scale;
                h[k] *= keep[k];
            }
        }
        tr.pre.push_back(std::move(z));
        tr.keep.push_back(std::move(keep));
        tr.inputs.push_back(std::move(h));
    }
    dense(layers.back(), tr.inputs.back(), tr.logits);
    return tr;
}

/// Accumulates d(loss)/d(params) for one sample given d(loss)/d(logits).
void backward(const DeepHitNet& net, const Trace& tr, std::vector<double> delta,
              std::vector<DenseLayer>& grad) {
    const auto& layers = net.layers();
    const auto& cfg = net.config();
    for (std::size_t l = layers.size(); l-- > 0;) {
        const DenseLayer& layer = layers[l];
        DenseLayer& g = grad[l];
        const auto& in = tr.inputs[l];
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            g.bias[static_cast<std::size_t>(o)] += d;
            double* gw = &g.weight[static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in)];
            for (int i = 0; i < layer.in; ++i) gw[i] += d * in[static_cast<std::size_t>(i)];
        }
        if (l == 0) break;
        std::vector<double> prev(static_cast<std::size_t>(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            if (d == 0.0) continue;
            const double* w = &layer.weight[static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in)];
            for (int i = 0; i < layer.in; ++i) prev[static_cast<std::size_t>(i)] += w[i] * d;
        }
        const auto& pre = tr.pre[l - 1];
        const auto& keep = tr.keep[l - 1];
        for (std::size_t k = 0; k < prev.size(); ++k) {
            if (!keep.empty()) prev[k] *= keep[k];
            prev[k] *= activate_grad(cfg.activation, pre[k]);
        }
        delta = std::move(prev);
    }
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
    std::vector<DenseLayer> out;
    out.reserve(layers.size());
    for (const auto& l : layers)
        out.push_back({l.in, l.out, std::vector<double>(l.weight.size(), 0.0),
                       std::vector<double>(l.bias.size(), 0.0)});
    return out;
}

void check_batch(const DeepHitNet& net, std::span<const SurvivalSample> batch) {
    if (batch.empty()) throw std::invalid_argument("loss of an empty batch");
    for (const auto& s : batch) {
        if (static_cast<int>(s.x.size()) != net.input_dim())
            throw std::invalid_argument("sample dimension does not match the network");
        if (s.time_to_event < 1 || s.time_to_event > net.bins())
            throw std::invalid_argument("time_to_event outside 1..bins");
    }
}

double cif_at(std::span<const double> pmf, int t) {
    double c = 0.0;
    for (int m = 0; m < t; ++m) c += pmf[static_cast<std::size_t>(m)];
    return c;
}

/// Loss and per-sample logit gradients, shared by the analytic and dropout paths.
LossValue loss_and_logit_grads(const std::vector<std::vector<double>>& logits,
                               std::span<const SurvivalSample> batch, const DeepHitConfig& cfg,
                               std::vector<std::vector<double>>* dlogits) {
    const std::size_t n = batch.size();
    const auto nb = static_cast<double>(n);
    std::vector<std::vector<double>> pmf(n);
    for (std::size_t i = 0; i < n; ++i) pmf[i] = risk_curve_from_logits(logits[i]).pmf;
    if (dlogits) dlogits->assign(n, std::vector<double>(logits.front().size(), 0.0));

    LossValue v;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& z = logits[i];
        const int k = batch[i].time_to_event;
        const double lse = log_sum_exp(z);
        if (batch[i].event) {
            v.nll += lse - z[static_cast<std::size_t>(k - 1)];
            if (dlogits) {
                auto& g = (*dlogits)[i];
                for (std::size_t m = 0; m < z.size(); ++m)
                    g[m] += cfg.alpha / nb * (pmf[i][m] - (m == static_cast<std::size_t>(k - 1) ? 1.0 : 0.0));
            }
        } else {
            const std::span<const double> tail(z.data() + k, z.size() - static_cast<std::size_t>(k));
            const double lse_tail = log_sum_exp(tail);
            v.nll += lse - lse_tail;
            if (dlogits) {
                auto& g = (*dlogits)[i];
                for (std::size_t m = 0; m < z.size(); ++m) {
                    const double tail_p = m >= static_cast<std::size_t>(k) ? std::exp(z[m] - lse_tail) : 0.0;
                    g[m] += cfg.alpha / nb * (pmf[i][m] - tail_p);
                }
            }
        }
    }
    v.nll /= nb;

    // Ranking: pairs (i, j) with event_i and t_i < t_j.
    double rank_sum = 0.0;
    std::vector<std::vector<double>> coef;  // d(rank_sum)/dF_i(t) per sample and t
    if (dlogits && cfg.beta > 0.0) coef.assign(n, std::vector<double>(static_cast<std::size_t>(cfg.bins) + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (!batch[i].event) continue;
        const int ti = batch[i].time_to_event;
        const double fi = cif_at(pmf[i], ti);
        for (std::size_t j = 0; j < n; ++j) {
            if (batch[j].time_to_event <= ti) continue;
            const double fj = cif_at(pmf[j], ti);
            const double eta = std::exp(-(fi - fj) / cfg.sigma);
            rank_sum += eta;
            ++v.pairs;
            if (!coef.empty()) {
                coef[i][static_cast<std::size_t>(ti)] += -eta / cfg.sigma;
                coef[j][static_cast<std::size_t>(ti)] += eta / cfg.sigma;
            }
        }
    }
    if (v.pairs > 0) v.rank = rank_sum / static_cast<double>(v.pairs);

    if (!coef.empty() && v.pairs > 0) {
        const double scale = cfg.beta / static_cast<double>(v.pairs);
        for (std::size_t i = 0; i < n; ++i) {
            auto& g = (*dlogits)[i];
            for (int t = 1; t <= cfg.bins; ++t) {
                const double c = coef[i][static_cast<std::size_t>(t)];
                if (c == 0.0) continue;
                const double f = cif_at(pmf[i], t);
                for (std::size_t m = 0; m < g.size(); ++m) {
                    const double dfdz = pmf[i][m] * ((m < static_cast<std::size_t>(t) ? 1.0 : 0.0) - f);
                    g[m] += scale * c * dfdz;
                }
            }
        }
    }
    v.total = cfg.alpha * v.nll + cfg.beta * v.rank;
    return v;
}

Gradients gradients_impl(const DeepHitNet& net, std::span<const SurvivalSample> batch,
                         const DeepHitConfig& cfg, std::mt19937_64* rng) {
    check_batch(net, batch);
    std::vector<Trace> traces;
    traces.reserve(batch.size());
    std::vector<std::vector<double>> logits;
    logits.reserve(batch.size());
    for (const auto& s : batch) {
        traces.push_back(trace_forward(net, s.x, rng));
        logits.push_back(traces.back().logits);
    }
    std::vector<std::vector<double>> dlogits;
    Gradients g;
    g.value = loss_and_logit_grads(logits, batch, cfg, &dlogits);
    g.layers = zeros_like(net.layers());
    for (std::size_t i = 0; i < batch.size(); ++i) backward(net, traces[i], dlogits[i], g.layers);
    return g;
}

void step(DeepHitNet& net, const Gradients& g, double lr, double decay) {
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t k = 0; k < layers[l].weight.size(); ++k)
            layers[l].weight[k] -= lr * (g.layers[l].weight[k] + decay * layers[l].weight[k]);
        for (std::size_t k = 0; k < layers[l].bias.size(); ++k)
            layers[l].bias[k] -= lr * g.layers[l].bias[k];
    }
}

/// Full-objective loss evaluated over consecutive batch-sized chunks.
double chunked_loss(const DeepHitNet& net, std::span<const SurvivalSample> rows,
                    const DeepHitConfig& cfg) {
    double acc = 0.0;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t start = 0; start < rows.size(); start += bs) {
        const auto chunk = rows.subspan(start, std::min(bs, rows.size() - start));
        acc += loss(net, chunk, cfg).total * static_cast<double>(chunk.size());
    }
    return acc / static_cast<double>(rows.size());
}

double mean_nll(const DeepHitNet& net, std::span<const SurvivalSample> rows) {
    DeepHitConfig nll_only;
    nll_only.bins = net.bins();
    nll_only.alpha = 1.0;
    nll_only.beta = 0.0;
    return loss(net, rows, nll_only).nll;
}

}  // namespace

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

std::optional<Activation> activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    return std::nullopt;
}

void validate(const MlpConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.hidden_widths.empty()) errs.emplace_back("MLP needs at least one hidden layer");
    for (int w : cfg.hidden_widths)
        if (w < 1) errs.emplace_back("hidden layer widths must be >= 1");
    if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0))
        errs.emplace_back("dropout rate must lie in [0, 1)");
    if (!(cfg.weight_init_scale >= 0.0)) errs.emplace_back("weight init scale must be >= 0");
    if (!errs.empty()) throw ConfigError(errs);
}

void validate(const DeepHitConfig& cfg) {
    std::vector<std::string> errs;
    if (cfg.bins < 1) errs.emplace_back("bins must be >= 1");
    if (cfg.alpha < 0.0 || cfg.beta < 0.0) errs.emplace_back("alpha and beta must be >= 0");
    if (!(cfg.alpha + cfg.beta > 0.0)) errs.emplace_back("alpha + beta must be > 0");
    if (!(cfg.sigma > 0.0)) errs.emplace_back("sigma must be > 0");
    if (cfg.learning_rate < 0.0) errs.emplace_back("learning rate must be >= 0");
    if (!(cfg.weight_decay >= 0.0)) errs.emplace_back("weight decay must be >= 0");
    if (!(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0)) errs.emplace_back("lr decay must lie in (0, 1]");
    if (cfg.batch_size < 1) errs.emplace_back("batch size must be >= 1");
    if (cfg.epochs < 0) errs.emplace_back("epochs must be >= 0");
    if (cfg.patience < 1) errs.emplace_back("patience must be >= 1");
    if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0))
        errs.emplace_back("validation fraction must lie in [0, 1)");
    if (!errs.empty()) throw ConfigError(errs);
}

RiskCurve risk_curve_from_logits(std::span<const double> logits) {
    RiskCurve c;
    const double lse = log_sum_exp(logits);
    c.pmf.resize(logits.size());
    double total = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        c.pmf[k] = std::exp(logits[k] - lse);
        total += c.pmf[k];
    }
    for (double& p : c.pmf) p /= total;
    c.cif.resize(logits.size() - 1);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < logits.size(); ++k) {
        acc += c.pmf[k];
        c.cif[k] = std::min(acc, 1.0);
    }
    return c;
}

double risk_score(const RiskCurve& curve) { return curve.cif.empty() ? 0.0 : curve.cif.back(); }

DeepHitNet::DeepHitNet(int input_dim, const MlpConfig& cfg, int bins)
    : cfg_(cfg), input_dim_(input_dim), bins_(bins) {
    validate(cfg);
    if (input_dim < 0) throw std::invalid_argument("negative input dimension");
    if (bins < 1) throw std::invalid_argument("bins must be >= 1");
    std::mt19937_64 rng(cfg.seed);
    int in = input_dim;
    std::vector<int> widths = cfg.hidden_widths;
    widths.push_back(bins + 1);
    for (int out : widths) {
        DenseLayer l;
        l.in = in;
        l.out = out;
        const double a = cfg.weight_init_scale * std::sqrt(6.0 / static_cast<double>(std::max(1, in + out)));
        std::uniform_real_distribution<double> u(-a, a);
        l.weight.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
        for (double& w : l.weight) w = a > 0.0 ? u(rng) : 0.0;
        l.bias.assign(static_cast<std::size_t>(out), 0.0);
        layers_.push_back(std::move(l));
        in = out;
    }
}

std::vector<double> DeepHitNet::logits(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim_)
        throw std::invalid_argument("input dimension " + std::to_string(x.size()) +
                                    " does not match network input " + std::to_string(input_dim_));
    return trace_forward(*this, x, nullptr).logits;
}

RiskCurve DeepHitNet::forward(std::span<const double> x) const {
    return risk_curve_from_logits(logits(x));
}

std::vector<double> DeepHitNet::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers_) {
        flat.insert(flat.end(), l.weight.begin(), l.weight.end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void DeepHitNet::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw std::invalid_argument("parameter count mismatch");
    std::size_t k = 0;
    for (auto& l : layers_) {
        for (double& w : l.weight) w = flat[k++];
        for (double& b : l.bias) b = flat[k++];
    }
}

std::size_t DeepHitNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<double> Gradients::flat() const {
    std::vector<double> out;
    for (const auto& l : layers) {
        out.insert(out.end(), l.weight.begin(), l.weight.end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

LossValue loss(const DeepHitNet& net, std::span<const SurvivalSample> batch,
               const DeepHitConfig& cfg) {
    check_batch(net, batch);
    std::vector<std::vector<double>> logits;
    logits.reserve(batch.size());
    for (const auto& s : batch) logits.push_back(net.logits(s.x));
    return loss_and_logit_grads(logits, batch, cfg, nullptr);
}

Gradients gradients(const DeepHitNet& net, std::span<const SurvivalSample> batch,
                    const DeepHitConfig& cfg) {
    return gradients_impl(net, batch, cfg, nullptr);
}

Gradients gradients_with_dropout(const DeepHitNet& net, std::span<const SurvivalSample> batch,
                                 const DeepHitConfig& cfg, std::mt19937_64& rng) {
    return gradients_impl(net, batch, cfg, &rng);
}

TrainResult train(std::span<const SurvivalSample> samples, const MlpConfig& mlp,
                  const DeepHitConfig& cfg) {
    validate(mlp);
    validate(cfg);
    if (samples.empty()) throw TrainingError("no training samples");
    if (std::none_of(samples.begin(), samples.end(), [](const auto& s) { return s.event == 1; }))
        throw TrainingError("training set has no events; the ranking loss is undefined");

    std::vector<SurvivalSample> rows(samples.begin(), samples.end());
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.anchor_date < b.anchor_date; });
    auto n_val = static_cast<std::size_t>(
        std::ceil(cfg.validation_fraction * static_cast<double>(rows.size())));
    if (n_val >= rows.size()) n_val = 0;
    const std::span<const SurvivalSample> fit(rows.data(), rows.size() - n_val);
    const std::span<const SurvivalSample> val(rows.data() + fit.size(), n_val);

    const int dim = static_cast<int>(rows.front().x.size());
    TrainResult res{DeepHitNet(dim, mlp, cfg.bins), {}};
    DeepHitNet best = res.net;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(fit.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<SurvivalSample> batch;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate * std::pow(cfg.lr_decay, epoch);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            batch.clear();
            for (std::size_t k = start; k < std::min(order.size(), start + bs); ++k)
                batch.push_back(fit[order[k]]);
            const Gradients g = gradients_with_dropout(res.net, batch, cfg, rng);
            step(res.net, g, lr, cfg.weight_decay);
        }
        res.history.train_loss.push_back(chunked_loss(res.net, fit, cfg));

        if (val.empty()) continue;
        const double v = mean_nll(res.net, val);
        res.history.validation_nll.push_back(v);
        if (v < best_val) {
            best_val = v;
            best = res.net;
            res.history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    if (!val.empty() && res.history.best_epoch >= 0) res.net = std::move(best);
    return res;
}

RiskCurve DeepHitModel::predict(std::span<const double> aggregate) const {
    return net.forward(apply_scaler(scaler, aggregate));
}

std::vector<DailyRisk> daily_risk_series(const DeepHitModel& model, const FeaturePanel& panel,
                                         std::string_view player) {
    if (panel.feature_names() != model.feature_names)
        throw DataError("panel features do not match the model's feature order");
    const auto p = panel.player_index(player);
    if (!p) throw DataError("unknown player: " + std::string(player));
    const FeaturePanel agg = rolling_means(panel, model.lookback);
    const auto& t = agg.track(*p);
    std::vector<DailyRisk> out;
    std::vector<double> x(agg.n_features());
    for (std::size_t d = static_cast<std::size_t>(model.lookback - 1); d < t.n_days(); ++d) {
        for (std::size_t f = 0; f < x.size(); ++f) x[f] = t.value(d, f);
        out.push_back({t.first_date() + static_cast<int>(d), model.predict(x)});
    }
    return out;
}

std::string checkpoint_text(const DeepHitModel& m) {
    std::ostringstream os;
    os << std::setprecision(17);
    const auto& mlp = m.net.config();
    const auto& c = m.config;
    os << "injurycast-deephit " << kCheckpointVersion << '\n';
    os << "lookback " << m.lookback << '\n';
    os << "input_dim " << m.net.input_dim() << '\n';
    os << "bins " << c.bins << '\n';
    os << "activation " << to_string(mlp.activation) << '\n';
    os << "hidden " << mlp.hidden_widths.size();
    for (int w : mlp.hidden_widths) os << ' ' << w;
    os << '\n';
    os << "dropout " << mlp.dropout_rate << '\n';
    os << "init_scale " << mlp.weight_init_scale << '\n';
    os << "mlp_seed " << mlp.seed << '\n';
    os << "alpha " << c.alpha << "\nbeta " << c.beta << "\nsigma " << c.sigma << '\n';
    os << "learning_rate " << c.learning_rate << "\nlr_decay " << c.lr_decay
       << "\nweight_decay " << c.weight_decay << '\n';
    os << "batch_size " << c.batch_size << "\nepochs " << c.epochs << "\npatience " << c.patience
       << '\n';
    os << "validation_fraction " << c.validation_fraction << "\nseed " << c.seed << '\n';
    os << "features " << m.feature_names.size() << '\n';
    for (const auto& f : m.feature_names) os << f << '\n';
    os << "scaler_mean";
    for (double v : m.scaler.mean) os << ' ' << v;
    os << "\nscaler_sd";
    for (double v : m.scaler.sd) os << ' ' << v;
    os << '\n';
    for (const auto& l : m.net.layers()) {
        os << "layer " << l.in << ' ' << l.out << '\n';
        for (std::size_t k = 0; k < l.weight.size(); ++k) os << (k ? " " : "") << l.weight[k];
        os << '\n';
        for (std::size_t k = 0; k < l.bias.size(); ++k) os << (k ? " " : "") << l.bias[k];
        os << '\n';
    }
    return os.str();
}

DeepHitModel parse_checkpoint(std::string_view text) {
    std::istringstream is{std::string(text)};
    auto expect = [&](const char* key) {
        std::string k;
        if (!(is >> k) || k != key) throw DataError(std::string("checkpoint: expected '") + key + "'");
    };
    auto read_int = [&](const char* key) {
        expect(key);
        long long v = 0;
        if (!(is >> v)) throw DataError(std::string("checkpoint: bad value for ") + key);
        return v;
    };
    auto read_double = [&](const char* key) {
        expect(key);
        std::string tok;
        is >> tok;
        const auto v = csv::parse_number(tok);
        if (!v) throw DataError(std::string("checkpoint: bad value for ") + key);
        return *v;
    };

    DeepHitModel m;
    if (read_int("injurycast-deephit") != kCheckpointVersion)
        throw DataError("checkpoint: unsupported version");
    m.lookback = static_cast<int>(read_int("lookback"));
    const int input_dim = static_cast<int>(read_int("input_dim"));
    DeepHitConfig& c = m.config;
    c.bins = static_cast<int>(read_int("bins"));
    MlpConfig mlp;
    expect("activation");
    std::string act;
    is >> act;
    const auto a = activation_from_string(act);
    if (!a) throw DataError("checkpoint: unknown activation");
    mlp.activation = *a;
    const auto n_hidden = read_int("hidden");
    mlp.hidden_widths.clear();
    for (long long i = 0; i < n_hidden; ++i) {
        int w = 0;
        is >> w;
        mlp.hidden_widths.push_back(w);
    }
    mlp.dropout_rate = read_double("dropout");
    mlp.weight_init_scale = read_double("init_scale");
    mlp.seed = static_cast<std::uint64_t>(read_int("mlp_seed"));
    c.alpha = read_double("alpha");
    c.beta = read_double("beta");
    c.sigma = read_double("sigma");
    c.learning_rate = read_double("learning_rate");
    c.lr_decay = read_double("lr_decay");
    c.weight_decay = read_double("weight_decay");
    c.batch_size = static_cast<int>(read_int("batch_size"));
    c.epochs = static_cast<int>(read_int("epochs"));
    c.patience = static_cast<int>(read_int("patience"));
    c.validation_fraction = read_double("validation_fraction");
    c.seed = static_cast<std::uint64_t>(read_int("seed"));
    const auto n_features = read_int("features");
    std::string line;
    std::getline(is, line);
    for (long long i = 0; i < n_features; ++i) {
        std::getline(is, line);
        m.feature_names.push_back(line);
    }
    auto read_vec = [&](std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) {
            std::string tok;
            is >> tok;
            const auto parsed = csv::parse_number(tok);
            if (!parsed) throw DataError("checkpoint: malformed number");
            x = *parsed;
        }
        return v;
    };
    expect("scaler_mean");
    m.scaler.mean = read_vec(static_cast<std::size_t>(n_features));
    expect("scaler_sd");
    m.scaler.sd = read_vec(static_cast<std::size_t>(n_features));

    m.net = DeepHitNet(input_dim, mlp, c.bins);
    for (auto& l : m.net.layers()) {
        const auto in = read_int("layer");
        long long out = 0;
        is >> out;
        if (in != l.in || out != l.out) throw DataError("checkpoint: layer shape mismatch");
        l.weight = read_vec(l.weight.size());
        l.bias = read_vec(l.bias.size());
    }
    return m;
}

void save_checkpoint(const DeepHitModel& model, const std::filesystem::path& path) {
    csv::write_file_atomic(path, checkpoint_text(model));
}

DeepHitModel load_checkpoint(const std::filesystem::path& path,
                             const std::vector<std::string>& expected_features) {
    DeepHitModel m = parse_checkpoint(csv::read_file(path));
    if (m.feature_names != expected_features)
        throw DataError("checkpoint feature order does not match the current panel");
    return m;
}

}  // namespace injurycast
