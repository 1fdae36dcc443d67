#ifndef NPN_LABELS_HPP_
#define NPN_LABELS_HPP_

#include <cstddef>
#include <stdexcept>

#include "npn/corpus.hpp"

namespace npn {

// "The concerning character is the p-th character of an l-character nugget",
// or NIL when length == 0.
struct NuggetLabel {
  int length = 0;
  int position = 0;

  bool is_nil() const { return length == 0; }
  static NuggetLabel nil() { return {}; }
  friend bool operator==(const NuggetLabel&, const NuggetLabel&) = default;
};

// Class 0 is NIL; the rest are ordered by (length, position), so the class count
// for maximum nugget length L is (L^2 + L) / 2 + 1.
constexpr int nugget_class_count(int max_length) { return max_length * (max_length + 1) / 2 + 1; }

int encode_label(int length, int position, int max_length);
int encode_label(const NuggetLabel& label, int max_length);
NuggetLabel decode_label(int class_index, int max_length);

// Throws std::out_of_range when the character is outside the trigger.
NuggetLabel label_for(const TriggerNugget& trigger, std::size_t char_index);

}  // namespace npn

#endif  // NPN_LABELS_HPP_
