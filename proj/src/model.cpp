#include "cdaug/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace cdaug {

ReferenceModel make_softmax_linear(std::size_t channels, std::size_t timesteps,
                                   std::size_t classes) {
    ReferenceModel m;
    m.kind = ModelKind::SoftmaxLinear;
    m.input_channels = channels;
    m.input_timesteps = timesteps;
    m.classes = classes;
    m.w1.assign(classes * channels * timesteps, 0.0);
    m.b1.assign(classes, 0.0);
    validate_model(m);
    return m;
}

ReferenceModel make_mlp(std::size_t channels, std::size_t timesteps, std::size_t classes,
                        std::size_t hidden, SeededRng& rng) {
    ReferenceModel m;
    m.kind = ModelKind::Mlp;
    m.input_channels = channels;
    m.input_timesteps = timesteps;
    m.classes = classes;
    m.hidden = hidden;
    const std::size_t d = channels * timesteps;
    m.w1.resize(hidden * d);
    m.b1.assign(hidden, 0.0);
    m.w2.resize(classes * hidden);
    m.b2.assign(classes, 0.0);
    rng.fill_normal(m.w1, 0.0, std::sqrt(2.0 / static_cast<double>(d)));
    rng.fill_normal(m.w2, 0.0, std::sqrt(2.0 / static_cast<double>(hidden)));
    validate_model(m);
    return m;
}

namespace {

void softmax_inplace(std::vector<double>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

struct Scratch {
    std::vector<double> pre;     // hidden pre-activation (mlp)
    std::vector<double> hidden;  // relu output (mlp)
    std::vector<double> logits;
};

void forward(const ReferenceModel& m, std::span<const double> x, Scratch& s) {
    const std::size_t d = m.input_dim();
    s.logits.assign(m.classes, 0.0);
    if (m.kind == ModelKind::SoftmaxLinear) {
        for (std::size_t k = 0; k < m.classes; ++k) {
            const double* row = m.w1.data() + k * d;
            double acc = m.b1[k];
            for (std::size_t i = 0; i < d; ++i) acc += row[i] * x[i];
            s.logits[k] = acc;
        }
    } else {
        s.pre.assign(m.hidden, 0.0);
        s.hidden.assign(m.hidden, 0.0);
        for (std::size_t j = 0; j < m.hidden; ++j) {
            const double* row = m.w1.data() + j * d;
            double acc = m.b1[j];
            for (std::size_t i = 0; i < d; ++i) acc += row[i] * x[i];
            s.pre[j] = acc;
            s.hidden[j] = acc > 0.0 ? acc : 0.0;
        }
        for (std::size_t k = 0; k < m.classes; ++k) {
            const double* row = m.w2.data() + k * m.hidden;
            double acc = m.b2[k];
            for (std::size_t j = 0; j < m.hidden; ++j) acc += row[j] * s.hidden[j];
            s.logits[k] = acc;
        }
    }
    softmax_inplace(s.logits);
}

void check_input(const ReferenceModel& m, const Window& w) {
    if (w.channels() != m.input_channels || w.timesteps() != m.input_timesteps)
        raise(ErrorCode::ShapeMismatch,
              "window shape " + std::to_string(w.channels()) + "x" +
                  std::to_string(w.timesteps()) + " does not match model input " +
                  std::to_string(m.input_channels) + "x" + std::to_string(m.input_timesteps));
}

struct Gradients {
    std::vector<double> w1, b1, w2, b2;

    void zero_like(const ReferenceModel& m) {
        w1.assign(m.w1.size(), 0.0);
        b1.assign(m.b1.size(), 0.0);
        w2.assign(m.w2.size(), 0.0);
        b2.assign(m.b2.size(), 0.0);
    }
};

// Accumulates d(mean CE)/d(params) scaled by `weight` for one sample and
// returns its cross-entropy loss.
double backward(const ReferenceModel& m, std::span<const double> x, int label, double weight,
                Scratch& s, Gradients& g) {
    forward(m, x, s);
    const double loss = cross_entropy(s.logits, label);
    const std::size_t d = m.input_dim();
    // d loss / d logits = probs - onehot
    std::vector<double>& gl = s.logits;
    gl[static_cast<std::size_t>(label)] -= 1.0;
    if (m.kind == ModelKind::SoftmaxLinear) {
        for (std::size_t k = 0; k < m.classes; ++k) {
            const double gk = gl[k] * weight;
            if (gk == 0.0) continue;
            double* row = g.w1.data() + k * d;
            for (std::size_t i = 0; i < d; ++i) row[i] += gk * x[i];
            g.b1[k] += gk;
        }
    } else {
        for (std::size_t k = 0; k < m.classes; ++k) {
            const double gk = gl[k] * weight;
            double* row = g.w2.data() + k * m.hidden;
            for (std::size_t j = 0; j < m.hidden; ++j) row[j] += gk * s.hidden[j];
            g.b2[k] += gk;
        }
        for (std::size_t j = 0; j < m.hidden; ++j) {
            if (s.pre[j] <= 0.0) continue;  // relu gate
            double gh = 0.0;
            for (std::size_t k = 0; k < m.classes; ++k)
                gh += gl[k] * m.w2[k * m.hidden + j];
            gh *= weight;
            if (gh == 0.0) continue;
            double* row = g.w1.data() + j * d;
            for (std::size_t i = 0; i < d; ++i) row[i] += gh * x[i];
            g.b1[j] += gh;
        }
    }
    return loss;
}

struct AdamState {
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    Gradients m, v;
    long long t = 0;

    void init(const ReferenceModel& model) {
        m.zero_like(model);
        v.zero_like(model);
        t = 0;
    }

    void step(ReferenceModel& model, const Gradients& g, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
        update(model.w1, g.w1, m.w1, v.w1, lr, bc1, bc2);
        update(model.b1, g.b1, m.b1, v.b1, lr, bc1, bc2);
        update(model.w2, g.w2, m.w2, v.w2, lr, bc1, bc2);
        update(model.b2, g.b2, m.b2, v.b2, lr, bc1, bc2);
    }

private:
    static void update(std::vector<double>& p, const std::vector<double>& g,
                       std::vector<double>& m1, std::vector<double>& m2, double lr,
                       double bc1, double bc2) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g[i];
            m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g[i] * g[i];
            const double mhat = m1[i] / bc1;
            const double vhat = m2[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
        }
    }
};

double mean_loss(const ReferenceModel& m, const Dataset& data, Scratch& s) {
    double acc = 0.0;
    for (const LabeledWindow& lw : data.windows) {
        forward(m, lw.window.values, s);
        acc += cross_entropy(s.logits, lw.label);
    }
    return acc / static_cast<double>(data.windows.size());
}

} // namespace

std::vector<double> predict_proba(const ReferenceModel& m, const Window& w) {
    check_input(m, w);
    Scratch s;
    forward(m, w.values, s);
    return s.logits;
}

void predict_proba_batch(const ReferenceModel& m, std::span<const Window* const> windows,
                         std::span<double> out) {
    if (out.size() != windows.size() * m.classes)
        raise(ErrorCode::ShapeMismatch, "output buffer size mismatch");
    Scratch s;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        check_input(m, *windows[i]);
        forward(m, windows[i]->values, s);
        std::copy(s.logits.begin(), s.logits.end(), out.begin() + i * m.classes);
    }
}

int argmax_class(std::span<const double> probs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = i;
    return static_cast<int>(best);
}

int predict_class(const ReferenceModel& m, const Window& w) {
    const std::vector<double> probs = predict_proba(m, w);
    return argmax_class(probs);
}

double cross_entropy(std::span<const double> probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        raise(ErrorCode::BadLabel, "label " + std::to_string(label) + " out of range");
    const double p = std::max(probs[static_cast<std::size_t>(label)], 1e-12);
    return -std::log(p);
}

double cosine_lr(double t_cur, double period, double lr0, double lr_min) {
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * t_cur / period));
}

double cawr_lr(std::size_t epoch, const TrainConfig& cfg) {
    if (!cfg.use_cawr) return cfg.lr0;
    double t_cur = static_cast<double>(epoch);
    double period = static_cast<double>(cfg.cawr_period);
    while (t_cur >= period) {
        t_cur -= period;
        period = std::max(1.0, std::round(period * cfg.cawr_mult));
    }
    return cosine_lr(t_cur, period, cfg.lr0, cfg.lr_min);
}

std::string train_log_to_text(const TrainLog& log) {
    std::ostringstream out;
    out << "# epoch lr train_loss val_loss improved\n";
    char line[160];
    for (const TrainLogEntry& e : log.entries) {
        std::snprintf(line, sizeof(line), "%zu %.8g %.8g %.8g %d\n", e.epoch, e.lr,
                      e.train_loss, e.val_loss, e.improved ? 1 : 0);
        out << line;
    }
    out << "# best_epoch " << log.best_epoch << "\n";
    out << "# early_stopped " << (log.early_stopped ? 1 : 0) << " stopped_epoch "
        << log.stopped_epoch << "\n";
    return out.str();
}

FitResult fit(const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              ModelKind kind, std::size_t mlp_hidden, const Augmenter& augmenter) {
    validate_train_config(cfg);
    if (train.empty() || val.empty())
        raise(ErrorCode::EmptyDataset, "fit requires nonempty train and val datasets");
    validate_dataset(train);
    validate_dataset(val);
    if (train.class_names != val.class_names)
        raise(ErrorCode::ShapeMismatch, "train and val class names differ");

    const Window& probe = train.windows.front().window;
    const std::size_t channels = probe.channels();
    const std::size_t steps = probe.timesteps();
    const std::size_t classes = train.class_count();
    if (val.windows.front().window.channels() != channels ||
        val.windows.front().window.timesteps() != steps)
        raise(ErrorCode::ShapeMismatch, "val window shape differs from train");

    SeededRng rng(cfg.seed);
    SeededRng init_rng = rng.split(0x1417);
    ReferenceModel model = kind == ModelKind::SoftmaxLinear
                               ? make_softmax_linear(channels, steps, classes)
                               : make_mlp(channels, steps, classes, mlp_hidden, init_rng);

    AdamState adam;
    adam.init(model);
    Gradients grads;
    Scratch scratch;

    TrainLog log;
    ReferenceModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    log.best_epoch = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr = cawr_lr(epoch, cfg);
        Dataset pool_storage;
        const Dataset* pool = &train;
        if (augmenter) {
            pool_storage = augmenter(epoch);
            if (pool_storage.empty())
                raise(ErrorCode::EmptyDataset, "augmenter returned an empty pool");
            pool = &pool_storage;
        }

        const std::size_t n = pool->size();
        std::vector<std::size_t> perm = rng.sample_without_replacement(n, n);

        double loss_acc = 0.0;
        std::size_t offset = 0;
        while (offset < n) {
            const std::size_t batch = std::min(cfg.batch, n - offset);
            grads.zero_like(model);
            const double weight = 1.0 / static_cast<double>(batch);
            for (std::size_t i = 0; i < batch; ++i) {
                const LabeledWindow& lw = pool->windows[perm[offset + i]];
                loss_acc += backward(model, lw.window.values, lw.label, weight, scratch, grads);
            }
            adam.step(model, grads, lr);
            offset += batch;
        }
        const double train_loss = loss_acc / static_cast<double>(n);
        const double val_loss = mean_loss(model, val, scratch);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
            raise(ErrorCode::DivergedLoss, "non-finite loss at epoch " + std::to_string(epoch));

        const bool improved = val_loss < best_val;
        if (improved) {
            best_val = val_loss;
            best = model;
            log.best_epoch = epoch;
        }
        log.entries.push_back({epoch, lr, train_loss, val_loss, improved});
        log.stopped_epoch = epoch;
        if (epoch - log.best_epoch >= cfg.patience) {
            log.early_stopped = true;
            break;
        }
    }
    return {std::move(best), std::move(log)};
}

double gradient_check(const ReferenceModel& m, const Dataset& batch, double epsilon,
                      std::size_t coords, std::uint64_t seed) {
    if (batch.empty()) raise(ErrorCode::EmptyDataset, "gradient check needs a nonempty batch");
    validate_dataset(batch);

    ReferenceModel model = m;
    Gradients analytic;
    analytic.zero_like(model);
    Scratch scratch;
    const double weight = 1.0 / static_cast<double>(batch.size());
    for (const LabeledWindow& lw : batch.windows)
        backward(model, lw.window.values, lw.label, weight, scratch, analytic);

    std::vector<std::vector<double>*> params = {&model.w1, &model.b1, &model.w2, &model.b2};
    std::vector<const std::vector<double>*> grads = {&analytic.w1, &analytic.b1, &analytic.w2,
                                                     &analytic.b2};
    std::size_t total = 0;
    for (const auto* p : params) total += p->size();

    const auto loss_at = [&]() {
        double acc = 0.0;
        for (const LabeledWindow& lw : batch.windows) {
            forward(model, lw.window.values, scratch);
            acc += cross_entropy(scratch.logits, lw.label);
        }
        return acc / static_cast<double>(batch.size());
    };

    SeededRng rng(seed);
    double max_rel = 0.0;
    for (std::size_t trial = 0; trial < coords; ++trial) {
        std::size_t flat = static_cast<std::size_t>(rng.uniform_int(total));
        std::size_t part = 0;
        while (flat >= params[part]->size()) {
            flat -= params[part]->size();
            ++part;
        }
        double& coord = (*params[part])[flat];
        const double saved = coord;
        coord = saved + epsilon;
        const double up = loss_at();
        coord = saved - epsilon;
        const double down = loss_at();
        coord = saved;
        const double fd = (up - down) / (2.0 * epsilon);
        const double ga = (*grads[part])[flat];
        const double rel = std::abs(ga - fd) / std::max(std::abs(ga) + std::abs(fd), 1e-8);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

} // namespace cdaug
