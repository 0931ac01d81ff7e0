#include "cdaug/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cdaug {

using nlohmann::json;

// --- per-type json mapping --------------------------------------------------

static void to_json(json& j, const Band& b) { j = json{{"lo", b.lo}, {"hi", b.hi}}; }
static void from_json(const json& j, Band& b) {
    j.at("lo").get_to(b.lo);
    j.at("hi").get_to(b.hi);
}

static void to_json(json& j, const Window& w) {
    j = json{{"values", w.values},
             {"channel_names", w.channel_names},
             {"sampling_rate_hz", w.sampling_rate_hz}};
}
static void from_json(const json& j, Window& w) {
    j.at("values").get_to(w.values);
    j.at("channel_names").get_to(w.channel_names);
    j.at("sampling_rate_hz").get_to(w.sampling_rate_hz);
}

static void to_json(json& j, const LabeledWindow& lw) {
    j = json{{"window", lw.window}, {"label", lw.label}, {"subject_id", lw.subject_id}};
}
static void from_json(const json& j, LabeledWindow& lw) {
    j.at("window").get_to(lw.window);
    j.at("label").get_to(lw.label);
    j.at("subject_id").get_to(lw.subject_id);
}

// Dataset stores the shared window metadata once; each entry carries only
// values, label, and subject.
static void to_json(json& j, const Dataset& d) {
    json windows = json::array();
    for (const LabeledWindow& lw : d.windows)
        windows.push_back(json{{"values", lw.window.values},
                               {"label", lw.label},
                               {"subject_id", lw.subject_id}});
    json meta;
    if (!d.windows.empty()) {
        meta = json{{"channel_names", d.windows.front().window.channel_names},
                    {"sampling_rate_hz", d.windows.front().window.sampling_rate_hz}};
    } else {
        meta = json{{"channel_names", json::array()}, {"sampling_rate_hz", 0.0}};
    }
    j = json{{"class_names", d.class_names}, {"meta", meta}, {"windows", windows}};
}
static void from_json(const json& j, Dataset& d) {
    j.at("class_names").get_to(d.class_names);
    std::vector<std::string> channel_names =
        j.at("meta").at("channel_names").get<std::vector<std::string>>();
    const double fs = j.at("meta").at("sampling_rate_hz").get<double>();
    d.windows.clear();
    for (const json& entry : j.at("windows")) {
        LabeledWindow lw;
        lw.window.channel_names = channel_names;
        lw.window.sampling_rate_hz = fs;
        entry.at("values").get_to(lw.window.values);
        entry.at("label").get_to(lw.label);
        entry.at("subject_id").get_to(lw.subject_id);
        d.windows.push_back(std::move(lw));
    }
}

static void to_json(json& j, const TransformSpec& spec) {
    j = json{{"kind", transform_kind_name(spec.kind)},
             {"alpha", spec.alpha},
             {"band", spec.band ? json(*spec.band) : json(nullptr)},
             {"start_frac", spec.start_frac},
             {"ratio", spec.ratio},
             {"channels", spec.channels}};
}
static void from_json(const json& j, TransformSpec& spec) {
    const std::string kind_name = j.at("kind").get<std::string>();
    const auto kind = transform_kind_from_name(kind_name);
    if (!kind) raise(ErrorCode::MalformedInput, "unknown transform kind '" + kind_name + "'");
    spec.kind = *kind;
    j.at("alpha").get_to(spec.alpha);
    if (j.at("band").is_null())
        spec.band.reset();
    else
        spec.band = j.at("band").get<Band>();
    j.at("start_frac").get_to(spec.start_frac);
    j.at("ratio").get_to(spec.ratio);
    j.at("channels").get_to(spec.channels);
}

static void to_json(json& j, const NormStats& s) {
    j = json{{"mean", s.mean}, {"variance", s.variance}};
}
static void from_json(const json& j, NormStats& s) {
    j.at("mean").get_to(s.mean);
    j.at("variance").get_to(s.variance);
}

static void to_json(json& j, const ReferenceModel& m) {
    j = json{{"kind", model_kind_name(m.kind)},
             {"input_channels", m.input_channels},
             {"input_timesteps", m.input_timesteps},
             {"classes", m.classes},
             {"hidden", m.hidden},
             {"w1", m.w1},
             {"b1", m.b1},
             {"w2", m.w2},
             {"b2", m.b2}};
}
static void from_json(const json& j, ReferenceModel& m) {
    const std::string kind_name = j.at("kind").get<std::string>();
    const auto kind = model_kind_from_name(kind_name);
    if (!kind) raise(ErrorCode::MalformedInput, "unknown model kind '" + kind_name + "'");
    m.kind = *kind;
    j.at("input_channels").get_to(m.input_channels);
    j.at("input_timesteps").get_to(m.input_timesteps);
    j.at("classes").get_to(m.classes);
    j.at("hidden").get_to(m.hidden);
    j.at("w1").get_to(m.w1);
    j.at("b1").get_to(m.b1);
    j.at("w2").get_to(m.w2);
    j.at("b2").get_to(m.b2);
}

static void to_json(json& j, const TrainConfig& c) {
    j = json{{"lr0", c.lr0},
             {"batch", c.batch},
             {"max_epochs", c.max_epochs},
             {"cawr_period", c.cawr_period},
             {"cawr_mult", c.cawr_mult},
             {"lr_min", c.lr_min},
             {"patience", c.patience},
             {"use_cawr", c.use_cawr},
             {"seed", c.seed}};
}
static void from_json(const json& j, TrainConfig& c) {
    j.at("lr0").get_to(c.lr0);
    j.at("batch").get_to(c.batch);
    j.at("max_epochs").get_to(c.max_epochs);
    j.at("cawr_period").get_to(c.cawr_period);
    j.at("cawr_mult").get_to(c.cawr_mult);
    j.at("lr_min").get_to(c.lr_min);
    j.at("patience").get_to(c.patience);
    j.at("use_cawr").get_to(c.use_cawr);
    j.at("seed").get_to(c.seed);
}

static void to_json(json& j, const TransformSetConfig& c) {
    j = json{{"jitter", c.jitter},
             {"clip", c.clip},
             {"segment_out", c.segment_out},
             {"sensor_out", c.sensor_out},
             {"alpha_center", c.alpha_center},
             {"clip_ratio_center", c.clip_ratio_center},
             {"segment_ratio_center", c.segment_ratio_center},
             {"spread", c.spread},
             {"allow_full_sensor_out", c.allow_full_sensor_out}};
}
static void from_json(const json& j, TransformSetConfig& c) {
    j.at("jitter").get_to(c.jitter);
    j.at("clip").get_to(c.clip);
    j.at("segment_out").get_to(c.segment_out);
    j.at("sensor_out").get_to(c.sensor_out);
    j.at("alpha_center").get_to(c.alpha_center);
    j.at("clip_ratio_center").get_to(c.clip_ratio_center);
    j.at("segment_ratio_center").get_to(c.segment_ratio_center);
    j.at("spread").get_to(c.spread);
    j.at("allow_full_sensor_out").get_to(c.allow_full_sensor_out);
}

static void to_json(json& j, const CompetitiveConfig& c) {
    j = json{{"n1", c.n1},
             {"n2", c.n2},
             {"transform_set_size", c.transform_set_size},
             {"train", c.train},
             {"set_cfg", c.set_cfg},
             {"model_kind", model_kind_name(c.model_kind)},
             {"mlp_hidden", c.mlp_hidden},
             {"augment", c.augment}};
}
static void from_json(const json& j, CompetitiveConfig& c) {
    j.at("n1").get_to(c.n1);
    j.at("n2").get_to(c.n2);
    j.at("transform_set_size").get_to(c.transform_set_size);
    j.at("train").get_to(c.train);
    j.at("set_cfg").get_to(c.set_cfg);
    const std::string kind_name = j.at("model_kind").get<std::string>();
    const auto kind = model_kind_from_name(kind_name);
    if (!kind) raise(ErrorCode::MalformedInput, "unknown model kind '" + kind_name + "'");
    c.model_kind = *kind;
    j.at("mlp_hidden").get_to(c.mlp_hidden);
    j.at("augment").get_to(c.augment);
}

static void to_json(json& j, const ModelArtifact& a) {
    j = json{{"model", a.model},
             {"norm_stats", a.norm_stats},
             {"transform_set", a.transform_set},
             {"hyper", a.hyper},
             {"class_names", a.class_names}};
}
static void from_json(const json& j, ModelArtifact& a) {
    j.at("model").get_to(a.model);
    j.at("norm_stats").get_to(a.norm_stats);
    j.at("transform_set").get_to(a.transform_set);
    j.at("hyper").get_to(a.hyper);
    j.at("class_names").get_to(a.class_names);
}

static void to_json(json& j, const VoteRecord::VariantVote& v) {
    j = json{{"spec", v.spec}, {"predicted", v.predicted}, {"probs", v.probs}};
}
static void from_json(const json& j, VoteRecord::VariantVote& v) {
    j.at("spec").get_to(v.spec);
    j.at("predicted").get_to(v.predicted);
    j.at("probs").get_to(v.probs);
}

static void to_json(json& j, const VoteRecord& v) {
    j = json{{"base_prediction", v.base_prediction},
             {"base_probs", v.base_probs},
             {"variant_votes", v.variant_votes},
             {"final_prediction", v.final_prediction}};
}
static void from_json(const json& j, VoteRecord& v) {
    j.at("base_prediction").get_to(v.base_prediction);
    j.at("base_probs").get_to(v.base_probs);
    j.at("variant_votes").get_to(v.variant_votes);
    j.at("final_prediction").get_to(v.final_prediction);
}

static void to_json(json& j, const BandSensitivity& b) {
    j = json{{"band", b.band}, {"flip_rate", b.flip_rate}};
}
static void from_json(const json& j, BandSensitivity& b) {
    j.at("band").get_to(b.band);
    j.at("flip_rate").get_to(b.flip_rate);
}

static void to_json(json& j, const Explanation& e) {
    json segments = json::array();
    for (const auto& [start, end] : e.sufficient_segments)
        segments.push_back(json::array({start, end}));
    j = json{{"necessity", e.necessity},
             {"non_essential_mask", e.non_essential_mask},
             {"sufficient_segments", segments},
             {"band_sensitivity", e.band_sensitivity},
             {"channel_sensitivity", e.channel_sensitivity},
             {"predicted_class", e.predicted_class},
             {"n_variants_used", e.n_variants_used}};
}
static void from_json(const json& j, Explanation& e) {
    j.at("necessity").get_to(e.necessity);
    j.at("non_essential_mask").get_to(e.non_essential_mask);
    e.sufficient_segments.clear();
    for (const json& seg : j.at("sufficient_segments"))
        e.sufficient_segments.emplace_back(seg.at(0).get<std::size_t>(),
                                           seg.at(1).get<std::size_t>());
    j.at("band_sensitivity").get_to(e.band_sensitivity);
    j.at("channel_sensitivity").get_to(e.channel_sensitivity);
    j.at("predicted_class").get_to(e.predicted_class);
    j.at("n_variants_used").get_to(e.n_variants_used);
}

static void to_json(json& j, const SyntheticSpec& s) {
    j = json{{"classes", s.classes},
             {"subjects", s.subjects},
             {"windows_per_subject_per_class", s.windows_per_subject_per_class},
             {"channels", s.channels},
             {"timesteps", s.timesteps},
             {"sampling_rate_hz", s.sampling_rate_hz},
             {"mode", s.mode == SyntheticSpec::Mode::Segment ? "segment" : "band"},
             {"carriers_hz", s.carriers_hz},
             {"amplitude", s.amplitude},
             {"segment_start", s.segment_start},
             {"segment_end", s.segment_end},
             {"noise_floor", s.noise_floor},
             {"subject_amp_jitter", s.subject_amp_jitter},
             {"window_amp_jitter", s.window_amp_jitter}};
}
static void from_json(const json& j, SyntheticSpec& s) {
    j.at("classes").get_to(s.classes);
    j.at("subjects").get_to(s.subjects);
    j.at("windows_per_subject_per_class").get_to(s.windows_per_subject_per_class);
    j.at("channels").get_to(s.channels);
    j.at("timesteps").get_to(s.timesteps);
    j.at("sampling_rate_hz").get_to(s.sampling_rate_hz);
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "segment")
        s.mode = SyntheticSpec::Mode::Segment;
    else if (mode == "band")
        s.mode = SyntheticSpec::Mode::Band;
    else
        raise(ErrorCode::MalformedInput, "unknown synthetic mode '" + mode + "'");
    j.at("carriers_hz").get_to(s.carriers_hz);
    j.at("amplitude").get_to(s.amplitude);
    j.at("segment_start").get_to(s.segment_start);
    j.at("segment_end").get_to(s.segment_end);
    j.at("noise_floor").get_to(s.noise_floor);
    j.at("subject_amp_jitter").get_to(s.subject_amp_jitter);
    j.at("window_amp_jitter").get_to(s.window_amp_jitter);
}

static void to_json(json& j, const CorpusManifest::Entry& e) {
    j = json{{"file", e.file}, {"subject_id", e.subject_id}};
}
static void from_json(const json& j, CorpusManifest::Entry& e) {
    j.at("file").get_to(e.file);
    j.at("subject_id").get_to(e.subject_id);
}

static void to_json(json& j, const CorpusManifest& m) {
    j = json{{"sampling_rate_hz", m.sampling_rate_hz},
             {"class_names", m.class_names},
             {"recordings", m.recordings}};
}
static void from_json(const json& j, CorpusManifest& m) {
    j.at("sampling_rate_hz").get_to(m.sampling_rate_hz);
    j.at("class_names").get_to(m.class_names);
    j.at("recordings").get_to(m.recordings);
}

// --- envelope ----------------------------------------------------------------

namespace {

template <typename T>
std::string envelope(const char* kind, const T& value) {
    json doc{{"kind", kind}, {"payload", value}, {"schema_version", kSchemaVersion}};
    return doc.dump(2) + "\n";
}

json open_envelope(const std::string& text, const char* kind) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        raise(ErrorCode::MalformedInput,
              "invalid document at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    try {
        const int version = doc.at("schema_version").get<int>();
        if (version != kSchemaVersion)
            raise(ErrorCode::MalformedInput,
                  "unsupported schema_version " + std::to_string(version));
        const std::string found = doc.at("kind").get<std::string>();
        if (found != kind)
            raise(ErrorCode::MalformedInput,
                  std::string("expected kind '") + kind + "', found '" + found + "'");
        return doc.at("payload");
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedInput, e.what());
    }
}

template <typename T>
T parse_payload(const std::string& text, const char* kind) {
    const json payload = open_envelope(text, kind);
    try {
        return payload.get<T>();
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedInput, std::string(kind) + ": " + e.what());
    }
}

} // namespace

std::string to_text(const Window& w) { return envelope("window", w); }
std::string to_text(const LabeledWindow& lw) { return envelope("labeled_window", lw); }
std::string to_text(const Dataset& d) { return envelope("dataset", d); }
std::string to_text(const TransformSpec& spec) { return envelope("transform_spec", spec); }
std::string to_text(const NormStats& stats) { return envelope("norm_stats", stats); }
std::string to_text(const ReferenceModel& m) { return envelope("reference_model", m); }
std::string to_text(const ModelArtifact& a) { return envelope("model_artifact", a); }
std::string to_text(const VoteRecord& v) { return envelope("vote_record", v); }
std::string to_text(const Explanation& e) { return envelope("explanation", e); }
std::string to_text(const SyntheticSpec& spec) { return envelope("synthetic_spec", spec); }
std::string to_text(const CorpusManifest& m) { return envelope("corpus_manifest", m); }

Window window_from_text(const std::string& text) {
    return parse_payload<Window>(text, "window");
}
LabeledWindow labeled_window_from_text(const std::string& text) {
    return parse_payload<LabeledWindow>(text, "labeled_window");
}
Dataset dataset_from_text(const std::string& text) {
    return parse_payload<Dataset>(text, "dataset");
}
TransformSpec transform_spec_from_text(const std::string& text) {
    return parse_payload<TransformSpec>(text, "transform_spec");
}
NormStats norm_stats_from_text(const std::string& text) {
    return parse_payload<NormStats>(text, "norm_stats");
}
ReferenceModel reference_model_from_text(const std::string& text) {
    return parse_payload<ReferenceModel>(text, "reference_model");
}
ModelArtifact artifact_from_text(const std::string& text) {
    return parse_payload<ModelArtifact>(text, "model_artifact");
}
VoteRecord vote_record_from_text(const std::string& text) {
    return parse_payload<VoteRecord>(text, "vote_record");
}
Explanation explanation_from_text(const std::string& text) {
    return parse_payload<Explanation>(text, "explanation");
}
SyntheticSpec synthetic_spec_from_text(const std::string& text) {
    return parse_payload<SyntheticSpec>(text, "synthetic_spec");
}
CorpusManifest manifest_from_text(const std::string& text) {
    return parse_payload<CorpusManifest>(text, "corpus_manifest");
}

std::string vote_row_to_line(const VoteRow& row) {
    json j{{"index", row.index}, {"truth", row.truth}, {"vote", row.vote}};
    return j.dump();
}

VoteRow vote_row_from_line(const std::string& line) {
    try {
        const json j = json::parse(line);
        VoteRow row;
        j.at("index").get_to(row.index);
        j.at("truth").get_to(row.truth);
        j.at("vote").get_to(row.vote);
        return row;
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedInput, std::string("vote row: ") + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot open for writing: " + path.string());
    out << content;
    if (!out) raise(ErrorCode::IoError, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace cdaug
