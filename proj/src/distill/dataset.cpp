#include "distill/dataset.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "core/binio.hpp"

namespace bg::distill {

namespace {
constexpr uint32_t kMagic = 0x53444742;  // "BGDS"
constexpr uint32_t kVersion = 1;
constexpr uint32_t kRecordMagic = 0x53495045;  // "EPIS"
}  // namespace

int CurationCriteria::sustain_steps(double control_dt) const {
  const double steps = sustain_seconds / control_dt;
  const double rounded = std::round(steps);
  if (std::fabs(steps - rounded) > 1e-9 || rounded < 1) {
    throw std::invalid_argument("sustain duration is not an integer step count");
  }
  return static_cast<int>(rounded);
}

void CurationCriteria::validate() const {
  if (task_reward_threshold <= 0 || sustain_seconds <= 0 || episode_horizon <= 0 ||
      force_sum_threshold <= 0) {
    throw std::invalid_argument("curation thresholds must be positive");
  }
  (void)sustain_steps();
}

std::array<float, 9> normalize_action(const std::array<double, 9>& raw) {
  std::array<float, 9> out{};
  for (int j = 0; j < 9; ++j) {
    if (std::fabs(raw[j]) > 0.31) {
      throw std::runtime_error("demonstration action exceeds 0.31 rad: corrupt episode");
    }
    out[j] = static_cast<float>(raw[j] / kActionBound);
  }
  return out;
}

std::array<double, 9> denormalize_action(const float* normalized) {
  std::array<double, 9> out{};
  for (int j = 0; j < 9; ++j) out[j] = static_cast<double>(normalized[j]) * kActionBound;
  return out;
}

std::vector<uint8_t> DemoDataset::to_bytes() const {
  BinWriter w;
  w.put_u32(kMagic);
  w.put_u32(kVersion);
  w.put_u32(static_cast<uint32_t>(episodes.size()));
  w.put_u32(kDemoObsDim);
  w.put_u32(kDemoActDim);
  w.put_f64(criteria.task_reward_threshold);
  w.put_f64(criteria.sustain_seconds);
  w.put_f64(criteria.episode_horizon);
  w.put_f64(criteria.force_sum_threshold);
  w.put_u64_array(seeds.data(), seeds.size());

  for (const auto& e : episodes) {
    BinWriter rec;
    rec.put_u64(e.episode_id);
    rec.put_string(e.object_id);
    rec.put_u32(static_cast<uint32_t>(e.length));
    const auto draw = e.draw.to_array();
    rec.put_f32_array(draw.data(), draw.size());
    rec.put_f32_array(e.obs.data(), e.obs.size());
    rec.put_f32_array(e.action.data(), e.action.size());
    rec.put_f32_array(e.task_reward.data(), e.task_reward.size());
    rec.put_f32_array(e.forces.data(), e.forces.size());

    w.put_u32(kRecordMagic);
    w.put_u32(static_cast<uint32_t>(rec.size()));
    w.put_bytes(rec.bytes().data(), rec.size());
    w.put_u32(crc32(rec.bytes().data(), rec.size()));
  }
  return w.bytes();
}

DemoDataset DemoDataset::from_bytes(const std::vector<uint8_t>& bytes) {
  BinReader r(bytes.data(), bytes.size());
  if (r.get_u32() != kMagic) throw std::runtime_error("dataset: bad magic");
  const uint32_t version = r.get_u32();
  if (version != kVersion) {
    throw std::runtime_error("dataset: unsupported format version " + std::to_string(version));
  }
  const uint32_t count = r.get_u32();
  if (r.get_u32() != kDemoObsDim) throw std::runtime_error("dataset: observation dim mismatch");
  if (r.get_u32() != kDemoActDim) throw std::runtime_error("dataset: action dim mismatch");

  DemoDataset ds;
  ds.criteria.task_reward_threshold = r.get_f64();
  ds.criteria.sustain_seconds = r.get_f64();
  ds.criteria.episode_horizon = r.get_f64();
  ds.criteria.force_sum_threshold = r.get_f64();
  ds.seeds = r.get_u64_array();

  ds.episodes.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    if (r.get_u32() != kRecordMagic) throw std::runtime_error("dataset: bad record marker");
    const uint32_t len = r.get_u32();
    if (r.remaining() < len + 4) throw std::runtime_error("dataset: truncated record");
    const uint8_t* payload = r.cursor();
    r.skip(len);
    const uint32_t stored_crc = r.get_u32();
    if (stored_crc != crc32(payload, len)) {
      throw std::runtime_error("dataset: record CRC mismatch (episode " + std::to_string(i) + ")");
    }
    BinReader rec(payload, len);
    DemoEpisode e;
    e.episode_id = rec.get_u64();
    e.object_id = rec.get_string();
    e.length = static_cast<int>(rec.get_u32());
    const auto draw = rec.get_f32_array();
    if (draw.size() != env::RandomizationDraw::kArraySize) {
      throw std::runtime_error("dataset: bad randomization draw size");
    }
    std::array<float, env::RandomizationDraw::kArraySize> da{};
    std::copy(draw.begin(), draw.end(), da.begin());
    e.draw = env::RandomizationDraw::from_array(da);
    e.obs = rec.get_f32_array();
    e.action = rec.get_f32_array();
    e.task_reward = rec.get_f32_array();
    e.forces = rec.get_f32_array();
    const size_t t = static_cast<size_t>(e.length);
    if (e.obs.size() != t * kDemoObsDim || e.action.size() != t * kDemoActDim ||
        e.task_reward.size() != t || e.forces.size() != t * 3) {
      throw std::runtime_error("dataset: episode array sizes inconsistent with length");
    }
    ds.episodes.push_back(std::move(e));
  }
  if (ds.episodes.size() != count) throw std::runtime_error("dataset: episode count mismatch");
  if (r.remaining() != 0) throw std::runtime_error("dataset: trailing bytes");
  return ds;
}

void DemoDataset::save(const std::string& path) const { write_file(path, to_bytes()); }

DemoDataset DemoDataset::load(const std::string& path) { return from_bytes(read_file(path)); }

}  // namespace bg::distill
