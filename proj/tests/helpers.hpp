#pragma once

// Shared generators for the test suites. All randomness is seeded mt19937
// so every run sees the same corpus.

#include <random>
#include <string>
#include <vector>

#include "adkit/layout.hpp"

namespace testutil {

inline adkit::BBox random_box(std::mt19937& rng) {
  std::uniform_real_distribution<double> center(0.0, 1.0);
  std::uniform_real_distribution<double> extent(0.01, 0.6);
  return {center(rng), center(rng), extent(rng), extent(rng)};
}

inline std::string random_word(std::mt19937& rng, int min_len = 3,
                               int max_len = 8) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> ch('a', 'z');
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(ch(rng)));
  return s;
}

inline std::string random_sentence(std::mt19937& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s.push_back(' ');
    s += random_word(rng);
  }
  return s;
}

// A structurally valid random layout with up to `max_graphic` graphic
// elements and a couple of nongraphic ones.
inline adkit::Layout random_layout(std::mt19937& rng, int max_graphic = 8) {
  using namespace adkit;
  std::uniform_int_distribution<int> n_graphic(0, max_graphic);
  std::uniform_int_distribution<int> n_nongraphic(0, 3);
  std::uniform_int_distribution<int> kind(0, 2);

  Element subject = Element::subject(random_box(rng));
  std::vector<Element> nongraphic;
  const int nn = n_nongraphic(rng);
  for (int i = 0; i < nn; ++i)
    nongraphic.push_back(Element::nongraphic(random_word(rng), random_box(rng)));

  std::vector<Element> graphic;
  const int ng = n_graphic(rng);
  for (int i = 0; i < ng; ++i) {
    switch (kind(rng)) {
      case 0: graphic.push_back(Element::logo(random_box(rng))); break;
      case 1:
        graphic.push_back(Element::tagline(random_sentence(rng, 2), random_box(rng)));
        break;
      default: graphic.push_back(Element::underlay(random_box(rng))); break;
    }
  }
  return make_layout(subject, std::move(nongraphic), std::move(graphic));
}

inline adkit::CanvasSpec random_canvas(std::mt19937& rng) {
  std::uniform_int_distribution<int> side(200, 1600);
  std::uniform_real_distribution<double> ratio(0.3, 3.0);
  const int w = side(rng);
  const int h = side(rng);
  return adkit::CanvasSpec::make(w, h, ratio(rng),
                                 adkit::OcclusionClass::no_occ("product"));
}

}  // namespace testutil
