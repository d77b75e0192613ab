#pragma once

#include <random>
#include <string>
#include <vector>

#include "proxyme/adapters.hpp"
#include "proxyme/protocol.hpp"
#include "proxyme/util.hpp"

namespace proxyme::test {

/// Random but schema-valid envelopes covering every message type.
struct EnvelopeGen {
  std::mt19937_64 rng;

  std::size_t below(std::size_t n) { return uniform_below(rng, n); }
  bool coin() { return below(2) == 0; }
  std::int64_t num(std::int64_t hi) { return static_cast<std::int64_t>(below(static_cast<std::size_t>(hi))); }

  std::string str() {
    static const std::vector<std::string> pieces{"a", "Z", " ", "\"", "\\", "\n", "\t", "é", "日本", "🙂", "{", "}", "0", "\x01"};
    std::string s;
    const auto n = below(10);
    for (std::size_t i = 0; i < n; ++i) s += pieces[below(pieces.size())];
    return s;
  }
  template <class T>
  std::optional<T> maybe(T v) {
    return coin() ? std::optional<T>(std::move(v)) : std::nullopt;
  }
  Condition condition() {
    return {static_cast<VoiceMode>(below(2)), static_cast<ContentMode>(below(3))};
  }

  protocol::Payload payload() {
    using namespace protocol;
    switch (below(12)) {
      case 0:
        return JoinSession{static_cast<Role>(below(3)), maybe<int>(static_cast<int>(below(1000)))};
      case 1:
        return AssignCondition{static_cast<int>(below(6)), condition()};
      case 2:
        return AgentPrompt{str(), str(), maybe(str())};
      case 3: {
        UserUtterance u{maybe(str()), maybe(base64_encode(make_audio_stub(str() + "hi"))), coin()};
        if (!u.text && !u.audio_b64) u.text = str();
        return u;
      }
      case 4:
        return MediationStatus{static_cast<StageKind>(below(3)), static_cast<StageState>(below(2)), num(100000)};
      case 5:
        return AudioChunkMsg{str(), num(50), base64_encode(std::vector<std::uint8_t>{9, 8, 7, 6}), num(2000) + 1, coin()};
      case 6: {
        Control c{static_cast<ControlAction>(below(4)), std::nullopt};
        if (c.action == ControlAction::SetAutonomy || coin()) c.autonomy = static_cast<AutonomyLevel>(below(2));
        return c;
      }
      case 7:
        return ReleasePreview{str()};
      case 8: {
        SelfReportSubmit s;
        const auto n = below(4);
        for (std::size_t i = 0; i < n; ++i) {
          s.items.push_back({str(), static_cast<Construct>(below(3)), 1, 7, static_cast<int>(below(7)) + 1});
        }
        s.free_text = maybe(str());
        return s;
      }
      case 9:
        return LatencyReport{{num(5000), num(5000), num(5000), num(9000), num(20000), num(20000)}, num(5000), num(5000)};
      case 10:
        return ProtocolError{str(), str(), maybe<std::int64_t>(num(1000))};
      default: {
        MediatedText m{str(), str(), str(), str(), {}, coin()};
        const auto n = below(4);
        for (std::size_t i = 0; i < n; ++i) {
          switch (below(3)) {
            case 0: m.edit_script.push_back(EditOp::keep(static_cast<std::size_t>(below(9)))); break;
            case 1: m.edit_script.push_back(EditOp::insert(str())); break;
            default: m.edit_script.push_back(EditOp::erase(static_cast<std::size_t>(below(9))));
          }
        }
        return m;
      }
    }
  }

  protocol::Envelope envelope() { return {str(), num(INT32_MAX), payload()}; }
};

}  // namespace proxyme::test
