#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "rallyviz/design_space.h"
#include "rallyviz/pyramid.h"
#include "rallyviz/script.h"

namespace rallyviz::fixtures {

inline constexpr std::array<const char*, 3> kScriptNames = {"linear", "flashforward", "zigzag"};

/// 40 annotated clips: 21 Linear, 10 FlashForward, 3 FlashBack, 3 ZigZag,
/// 2 TimeFork, 1 Grouped.
std::vector<ClipAnnotation> sample_corpus();

/// Imported tactic facts for the fixture rally (KeyStroke on stroke#3).
nlohmann::json fixture_tactics();

/// The three scripted fixtures, built against the analyzed rally.
AugmentationScript fixture_script(const std::string& name, const Rally& rally);

/// Writes data/fixtures/* and data/corpus/sample_corpus.json under root.
void write_fixture_files(const std::string& root);

/// Loads data/fixtures/rally_300.json and tactics_import.json and analyzes them.
Rally fixture_rally(const std::string& root);

std::string fixture_path(const std::string& root, const std::string& relative);

}  // namespace rallyviz::fixtures
