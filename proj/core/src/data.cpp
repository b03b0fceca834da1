#include "cefl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cefl/random.hpp"

namespace cefl {
namespace {

using Vec3 = std::array<double, 3>;

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

Vec3 normalized(const Vec3& v) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return n > 0.0 ? (1.0 / n) * v : Vec3{0.0, 0.0, 1.0};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

using Mat3 = std::array<Vec3, 3>;

Vec3 rotate(const Mat3& r, const Vec3& v) {
  return {r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
          r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
          r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2]};
}

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

// Rz(c) * Ry(b) * Rx(a)
Mat3 rotation(double a, double b, double c) {
  const Mat3 rx{{{1, 0, 0}, {0, std::cos(a), -std::sin(a)}, {0, std::sin(a), std::cos(a)}}};
  const Mat3 ry{{{std::cos(b), 0, std::sin(b)}, {0, 1, 0}, {-std::sin(b), 0, std::cos(b)}}};
  const Mat3 rz{{{std::cos(c), -std::sin(c), 0}, {std::sin(c), std::cos(c), 0}, {0, 0, 1}}};
  return multiply(rz, multiply(ry, rx));
}

Mat3 random_rotation(Rng& rng, double sigma) {
  const double a = rng.normal(0.0, sigma);
  const double b = rng.normal(0.0, sigma);
  const double c = rng.normal(0.0, sigma);
  return rotation(a, b, c);
}

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}

// A posture change, optionally with an impact, relative to the event time.
struct Phase {
  double offset = 0.0;
  double transition = 1.0;
  Vec3 orientation{};
  double bump = 0.0;
  double bump_width = 0.1;
  Vec3 bump_dir{};
  double ring_freq = 0.0;
};

struct ClassTemplate {
  Vec3 start{};
  std::vector<Phase> phases;
  bool periodic = false;
};

// Class templates depend on the dataset seed only, so every client shares
// them. Fall templates share one structure and differ in the final posture
// and the impact profile.
std::array<ClassTemplate, kNumClasses> make_templates(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x7E3A11ULL));
  auto jitter = [&](Vec3 v, double s) {
    return normalized(v + Vec3{rng.normal(0, s), rng.normal(0, s), rng.normal(0, s)});
  };
  const Vec3 upright{0.0, -1.0, 0.0};
  std::array<ClassTemplate, kNumClasses> t{};

  const std::array<Vec3, 4> lying = {
      Vec3{0.0, -0.15, -1.0},   // forward lying
      Vec3{0.0, -0.55, -0.85},  // front knees lying
      Vec3{-1.0, -0.2, 0.0},    // sideward lying
      Vec3{0.0, -0.6, 0.8},     // back sitting chair
  };
  for (int k = 0; k < 4; ++k) {
    ClassTemplate& c = t[static_cast<std::size_t>(k)];
    c.start = jitter(upright, 0.08);
    Phase p;
    p.offset = 0.0;
    p.transition = rng.uniform(0.35, 0.9);
    p.orientation = jitter(lying[static_cast<std::size_t>(k)], 0.12);
    p.bump = rng.uniform(1.6, 3.2);
    p.bump_width = rng.uniform(0.05, 0.15);
    p.bump_dir = jitter(p.orientation - c.start, 0.3);
    p.ring_freq = rng.uniform(3.0, 7.0);
    c.phases.push_back(p);
  }

  {
    // sit chair: slow transition, soft landing
    ClassTemplate& c = t[4];
    c.start = jitter(upright, 0.08);
    Phase p;
    p.transition = rng.uniform(1.2, 2.0);
    p.orientation = jitter(Vec3{0.0, -0.5, 0.86}, 0.1);
    p.bump = rng.uniform(0.4, 0.8);
    p.bump_width = 0.2;
    p.bump_dir = jitter(Vec3{0.0, 1.0, 0.0}, 0.2);
    p.ring_freq = 2.0;
    c.phases.push_back(p);
  }
  for (int k = 5; k <= 6; ++k) {
    // car step in / out: two movements with an intermediate posture
    ClassTemplate& c = t[static_cast<std::size_t>(k)];
    const bool step_in = k == 5;
    c.start = jitter(step_in ? upright : Vec3{0.0, -0.5, 0.86}, 0.08);
    Phase first;
    first.transition = rng.uniform(0.6, 1.2);
    first.orientation = jitter(Vec3{0.6, -0.7, 0.35}, 0.12);
    first.bump = rng.uniform(0.5, 1.0);
    first.bump_width = 0.15;
    first.bump_dir = jitter(Vec3{1.0, 0.3, 0.0}, 0.2);
    first.ring_freq = 3.0;
    Phase second;
    second.offset = rng.uniform(1.2, 2.0);
    second.transition = rng.uniform(0.6, 1.2);
    second.orientation = jitter(step_in ? Vec3{0.0, -0.5, 0.86} : upright, 0.08);
    second.bump = rng.uniform(0.4, 0.9);
    second.bump_width = 0.12;
    second.bump_dir = jitter(Vec3{0.0, 1.0, 0.4}, 0.2);
    second.ring_freq = 4.0;
    c.phases = {first, second};
  }
  t[kDailyClass].start = jitter(upright, 0.05);
  t[kDailyClass].periodic = true;
  return t;
}

struct SubjectStyle {
  Mat3 placement{};
  double time_scale = 1.0;
  double intensity = 1.0;
};

SubjectStyle make_style(Rng& rng, const SynthOptions& opt) {
  SubjectStyle s;
  s.placement = random_rotation(rng, opt.subject_jitter);
  s.time_scale = rng.uniform(0.8, 1.25);
  s.intensity = rng.uniform(0.75, 1.3);
  return s;
}

RawRecording render(int subject_id, int activity, double duration, const ClassTemplate& tpl,
                    const SubjectStyle& style, Rng& rng, const SynthOptions& opt) {
  RawRecording rec;
  rec.subject_id = subject_id;
  rec.activity_class = activity;
  rec.sample_rate = kSampleRate;
  rec.duration = duration;
  const auto n = static_cast<std::size_t>(std::llround(kSampleRate * duration));
  rec.signal.resize(n);

  const Mat3 frame = multiply(style.placement, random_rotation(rng, opt.recording_jitter));
  const double event_max = std::min(opt.event_time_max, std::max(duration - 1.0, 0.0));
  const double event_time =
      rng.uniform(std::min(opt.event_time_min, event_max), event_max);

  // Periodic activity parameters (daily class).
  bool moving = false;
  double freq = 0.0;
  double amp = 0.0;
  std::array<double, 3> phase{};
  Vec3 forward{0.0, 0.0, 1.0};
  if (tpl.periodic) {
    moving = rng.uniform() < 0.8;
    freq = rng.uniform(1.4, 2.9);
    amp = rng.uniform(0.2, 0.9) * style.intensity;
    for (double& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    forward = normalized(Vec3{rng.normal(0, 0.3), rng.normal(0, 0.3), 1.0});
  }
  const Vec3 side = normalized(cross(tpl.start, forward));
  const double dt = 1.0 / kSampleRate;

  auto gravity_at = [&](double t) {
    Vec3 g = tpl.start;
    for (const Phase& p : tpl.phases) {
      const double t0 = event_time + p.offset * style.time_scale;
      const double s = smoothstep((t - t0) / (p.transition * style.time_scale));
      g = (1.0 - s) * g + s * p.orientation;
    }
    return normalized(g);
  };

  Vec3 prev = rotate(frame, gravity_at(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const Vec3 g = gravity_at(t);
    Vec3 acc = g;
    for (const Phase& p : tpl.phases) {
      const double tp = event_time + p.offset * style.time_scale +
                        p.transition * style.time_scale;
      const double u = (t - tp) / p.bump_width;
      double a = p.bump * style.intensity * std::exp(-0.5 * u * u);
      if (t > tp) {
        a += p.bump / 3.0 * style.intensity * std::exp(-(t - tp) / 0.25) *
             std::sin(2.0 * std::numbers::pi * p.ring_freq * (t - tp));
      }
      acc = acc + a * p.bump_dir;
    }
    if (moving) {
      const double w = 2.0 * std::numbers::pi * freq * t;
      acc = acc + (amp * std::sin(w + phase[0])) * tpl.start +
            (0.5 * amp * std::sin(2.0 * w + phase[1])) * forward +
            (0.3 * amp * std::sin(w + phase[2])) * side;
    }
    acc = rotate(frame, acc);
    const Vec3 gw = rotate(frame, g);
    const Vec3 omega = kSampleRate * cross(prev, gw);
    prev = gw;
    ImuSample& s = rec.signal[i];
    for (int a = 0; a < 3; ++a) {
      s[static_cast<std::size_t>(a)] = acc[static_cast<std::size_t>(a)] + rng.normal(0.0, opt.noise);
      s[static_cast<std::size_t>(a) + 3] =
          omega[static_cast<std::size_t>(a)] + rng.normal(0.0, opt.noise);
    }
  }
  return rec;
}

double class_duration(int activity, const SynthOptions& opt) {
  if (activity < kFirstFallLikeClass) return opt.fall_duration;
  if (activity < kDailyClass) return opt.fall_like_duration;
  return opt.daily_duration;
}

std::uint64_t client_seed(std::uint64_t seed, int client_id) {
  return mix_seed(seed) ^ static_cast<std::uint64_t>(client_id);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, const char* column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("column '") + column + "': not a number: '" + s + "'", line);
  }
}

}  // namespace

void HeterogeneityProfile::validate() const {
  double sum = 0.0;
  for (double w : class_weights) {
    if (!(w >= 0.0)) throw ConfigError("class weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("class weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

int slide_interval(double t_type, int i0, double t0) {
  if (!(t_type > 0.0) || !(t0 > 0.0)) {
    throw InputError("slide_interval: durations must be positive");
  }
  if (i0 < 1) throw InputError("slide_interval: reference interval must be >= 1");
  const auto v = std::llround(static_cast<double>(i0) * t_type / t0);
  return static_cast<int>(std::max<long long>(1, v));
}

std::vector<std::size_t> window_starts(std::size_t signal_length, std::size_t window_len,
                                       std::size_t interval) {
  if (interval == 0) throw InputError("window interval must be >= 1");
  if (window_len == 0) throw InputError("window length must be >= 1");
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window_len <= signal_length; s += interval) {
    starts.push_back(s);
  }
  return starts;
}

std::vector<SignalWindow> windows(const RawRecording& rec, std::size_t window_len,
                                  std::size_t interval, WarningLog* warnings) {
  if (window_len > rec.signal.size()) {
    if (warnings) {
      warnings->push_back("recording of subject " + std::to_string(rec.subject_id) +
                          " (activity " + std::to_string(rec.activity_class) +
                          ") is shorter than one window");
    }
    return {};
  }
  std::vector<SignalWindow> out;
  for (std::size_t s : window_starts(rec.signal.size(), window_len, interval)) {
    const auto first = rec.signal.begin() + static_cast<std::ptrdiff_t>(s);
    out.emplace_back(first, first + static_cast<std::ptrdiff_t>(window_len));
  }
  return out;
}

FeatureImage featurize(std::span<const ImuSample> window, int label) {
  if (window.size() != kWindowLength) {
    throw InputError("featurize: window has " + std::to_string(window.size()) +
                     " samples, expected " + std::to_string(kWindowLength));
  }
  FeatureImage img;
  img.label = label;
  img.pixels.resize(kFeatureLength);
  for (std::size_t c = 0; c < kImageChannels; ++c) {
    double lo = window[0][c];
    double hi = window[0][c];
    for (const ImuSample& s : window) {
      lo = std::min(lo, s[c]);
      hi = std::max(hi, s[c]);
    }
    const double range = hi - lo;
    double* plane = img.pixels.data() + c * kWindowLength;
    for (std::size_t i = 0; i < kWindowLength; ++i) {
      plane[i] = range > 0.0 ? std::clamp((window[i][c] - lo) / range, 0.0, 1.0) : 0.5;
    }
  }
  return img;
}

ClassHistogram apportion(std::size_t n, std::span<const double, kNumClasses> weights) {
  ClassHistogram counts{};
  std::array<double, kNumClasses> rem{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double exact = static_cast<double>(n) * weights[k];
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    rem[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  std::array<std::size_t, kNumClasses> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < n; i = (i + 1) % kNumClasses) {
    if (weights[order[i]] > 0.0) {
      ++counts[order[i]];
      ++assigned;
    }
  }
  return counts;
}

ClientShard split_train_test(int client_id, std::vector<FeatureImage> images,
                             std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5B117ULL + static_cast<std::uint64_t>(client_id)));
  rng.shuffle(std::span<FeatureImage>(images));

  ClassHistogram per_class{};
  for (const FeatureImage& img : images) {
    if (img.label < 0 || img.label >= static_cast<int>(kNumClasses)) {
      throw InputError("feature image label out of range");
    }
    ++per_class[static_cast<std::size_t>(img.label)];
  }
  const std::size_t n_train = images.size() * 4 / 5;
  ClassHistogram train_quota{};
  std::array<std::size_t, kNumClasses> rem{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    train_quota[k] = per_class[k] * 4 / 5;
    rem[k] = per_class[k] * 4 % 5;
    assigned += train_quota[k];
  }
  std::array<std::size_t, kNumClasses> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < n_train; ++i) {
    ++train_quota[order[i]];
    ++assigned;
  }

  ClientShard shard;
  shard.client_id = client_id;
  ClassHistogram taken{};
  for (const FeatureImage& img : images) {
    const auto k = static_cast<std::size_t>(img.label);
    if (taken[k] < train_quota[k]) {
      shard.train.add(img.pixels, img.label);
      ++taken[k];
    } else {
      shard.test.add(img.pixels, img.label);
    }
  }
  shard.class_histogram = taken;
  return shard;
}

RawRecording synth_recording(int subject_id, int activity_class, double duration,
                             std::uint64_t dataset_seed, std::uint64_t recording_seed,
                             const SynthOptions& options) {
  if (activity_class < 0 || activity_class >= static_cast<int>(kNumClasses)) {
    throw InputError("activity class out of range");
  }
  if (!(duration > 0.0)) throw InputError("recording duration must be positive");
  const auto templates = make_templates(dataset_seed);
  Rng style_rng(derive_seed(client_seed(dataset_seed, subject_id), 1));
  const SubjectStyle style = make_style(style_rng, options);
  Rng rng(recording_seed);
  return render(subject_id, activity_class, duration,
                templates[static_cast<std::size_t>(activity_class)], style, rng, options);
}

std::vector<ClientShard> synth_dataset(std::size_t n_clients,
                                       std::span<const HeterogeneityProfile> profiles,
                                       std::uint64_t seed, const SynthOptions& options,
                                       WarningLog* warnings) {
  if (profiles.size() != n_clients) {
    throw ConfigError("synth_dataset: " + std::to_string(profiles.size()) +
                      " profiles for " + std::to_string(n_clients) + " clients");
  }
  for (const auto& p : profiles) p.validate();
  const auto templates = make_templates(seed);

  std::vector<ClientShard> shards;
  shards.reserve(n_clients);
  for (std::size_t c = 0; c < n_clients; ++c) {
    const int id = static_cast<int>(c);
    const HeterogeneityProfile& profile = profiles[c];
    if (profile.n_samples == 0) {
      if (warnings) warnings->push_back("client " + std::to_string(c) + ": empty profile");
      ClientShard empty;
      empty.client_id = id;
      shards.push_back(std::move(empty));
      continue;
    }
    const std::uint64_t cseed = client_seed(seed, id);
    Rng style_rng(derive_seed(cseed, 1));
    const SubjectStyle style = make_style(style_rng, options);
    Rng rng(derive_seed(cseed, 2));

    const ClassHistogram counts = apportion(profile.n_samples, profile.class_weights);
    std::vector<FeatureImage> images;
    images.reserve(profile.n_samples);
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      const int cls = static_cast<int>(k);
      const double duration = class_duration(cls, options);
      const auto interval = static_cast<std::size_t>(slide_interval(duration));
      std::size_t made = 0;
      while (made < counts[k]) {
        const RawRecording rec = render(id, cls, duration, templates[k], style, rng, options);
        for (const SignalWindow& w : windows(rec, kWindowLength, interval, warnings)) {
          if (made == counts[k]) break;
          images.push_back(featurize(w, cls));
          ++made;
        }
      }
    }
    shards.push_back(split_train_test(id, std::move(images), seed));
  }
  return shards;
}

std::vector<HeterogeneityProfile> flagship_profiles(std::size_t n_clients, std::uint64_t seed) {
  std::vector<HeterogeneityProfile> out;
  out.reserve(n_clients);
  HeterogeneityProfile large;
  large.n_samples = 831;
  large.class_weights.fill(1.0 / kNumClasses);

  HeterogeneityProfile small;
  small.n_samples = 101;
  for (int k = 0; k < kFirstFallLikeClass; ++k) small.class_weights[static_cast<std::size_t>(k)] = 0.25;

  HeterogeneityProfile skewed;
  skewed.n_samples = 570;
  skewed.class_weights.fill(139.0 / 570.0 / 7.0);
  skewed.class_weights[kDailyClass] = 431.0 / 570.0;

  const std::array<HeterogeneityProfile, 3> fixed = {large, small, skewed};
  Rng rng(derive_seed(seed, 0xF1A6ULL));
  for (std::size_t c = 0; c < n_clients; ++c) {
    if (c < fixed.size()) {
      out.push_back(fixed[c]);
      continue;
    }
    HeterogeneityProfile p;
    p.n_samples = 150 + static_cast<std::size_t>(rng.below(151));
    // Random subset of 4-8 classes with gamma-like positive weights.
    const std::size_t present = 4 + static_cast<std::size_t>(rng.below(5));
    std::vector<std::size_t> classes = rng.permutation(kNumClasses);
    classes.resize(present);
    double sum = 0.0;
    for (std::size_t k : classes) {
      const double w = 0.3 + rng.uniform();
      p.class_weights[k] = w;
      sum += w;
    }
    for (double& w : p.class_weights) w /= sum;
    out.push_back(p);
  }
  return out;
}

int activity_from_label(std::string_view label) {
  static const std::map<std::string, int, std::less<>> kCodes = {
      {"FOL", 0}, {"FKL", 1}, {"SDL", 2}, {"BSC", 3}, {"SCH", 4}, {"CSI", 5},
      {"CSO", 6}, {"STD", 7}, {"WAL", 7}, {"JOG", 7}, {"JUM", 7}, {"STU", 7},
      {"STN", 7}};
  if (auto it = kCodes.find(label); it != kCodes.end()) return it->second;
  if (label.size() == 1 && label[0] >= '0' && label[0] < '0' + static_cast<int>(kNumClasses)) {
    return label[0] - '0';
  }
  return -1;
}

std::vector<RawRecording> ingest_csv(std::istream& in) {
  static const std::vector<std::string> kHeader = {"subject", "activity", "rate", "ax", "ay",
                                                   "az",      "gx",       "gy",   "gz"};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV file", 1);
  const auto header = split_csv(line);
  if (header != kHeader) {
    throw ParseError("header must be 'subject,activity,rate,ax,ay,az,gx,gy,gz'", 1);
  }

  // Per-subject row order is preserved; recordings are contiguous activity
  // runs within each subject.
  std::map<int, std::vector<RawRecording>> by_subject;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != kHeader.size()) {
      throw ParseError("expected 9 columns, found " + std::to_string(cells.size()), lineno);
    }
    const double subject_value = parse_double(cells[0], lineno, "subject");
    if (subject_value != std::floor(subject_value)) {
      throw ParseError("subject must be an integer", lineno);
    }
    const int subject = static_cast<int>(subject_value);
    const int activity = activity_from_label(cells[1]);
    if (activity < 0) throw ParseError("unknown activity label '" + cells[1] + "'", lineno);
    const double rate = parse_double(cells[2], lineno, "rate");
    if (!(rate > 0.0)) throw ParseError("rate must be positive", lineno);
    ImuSample s{};
    for (std::size_t i = 0; i < 6; ++i) {
      s[i] = parse_double(cells[3 + i], lineno, kHeader[3 + i].c_str());
    }

    auto& recs = by_subject[subject];
    if (recs.empty() || recs.back().activity_class != activity) {
      RawRecording r;
      r.subject_id = subject;
      r.activity_class = activity;
      r.sample_rate = rate;
      recs.push_back(std::move(r));
    } else if (recs.back().sample_rate != rate) {
      throw ParseError("sample rate changes within a recording", lineno);
    }
    recs.back().signal.push_back(s);
  }

  std::vector<RawRecording> out;
  for (auto& [subject, recs] : by_subject) {
    for (RawRecording& r : recs) {
      r.duration = static_cast<double>(r.signal.size()) / r.sample_rate;
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<RawRecording> ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return ingest_csv(in);
}

std::vector<ClientShard> shards_from_recordings(std::span<const RawRecording> recordings,
                                                std::uint64_t seed, WarningLog* warnings) {
  std::map<int, std::vector<FeatureImage>> by_subject;
  for (const RawRecording& rec : recordings) {
    auto& images = by_subject[rec.subject_id];
    const auto interval = static_cast<std::size_t>(slide_interval(rec.duration));
    for (const SignalWindow& w : windows(rec, kWindowLength, interval, warnings)) {
      images.push_back(featurize(w, rec.activity_class));
    }
  }
  std::vector<ClientShard> shards;
  int client = 0;
  for (auto& [subject, images] : by_subject) {
    if (images.empty() && warnings) {
      warnings->push_back("subject " + std::to_string(subject) + " yields no windows");
    }
    shards.push_back(split_train_test(client++, std::move(images), seed));
  }
  return shards;
}

void export_shard_jsonl(const ClientShard& shard, std::ostream& out) {
  auto dump = [&](const Batch& b, const char* split) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto f = b.features(i);
      nlohmann::json line = {{"split", split},
                             {"label", b.label(i)},
                             {"pixels", std::vector<double>(f.begin(), f.end())}};
      out << line.dump() << '\n';
    }
  };
  dump(shard.train, "train");
  dump(shard.test, "test");
}

}  // namespace cefl
