#include "npn/labels.hpp"

#include <string>

namespace npn {

int encode_label(int length, int position, int max_length) {
  if (max_length < 1 || length < 1 || length > max_length || position < 1 || position > length) {
    throw std::out_of_range("nugget label (" + std::to_string(length) + ", " +
                            std::to_string(position) + ") invalid for max length " +
                            std::to_string(max_length));
  }
  return length * (length - 1) / 2 + position;
}

int encode_label(const NuggetLabel& label, int max_length) {
  if (label.is_nil()) return 0;
  return encode_label(label.length, label.position, max_length);
}

NuggetLabel decode_label(int class_index, int max_length) {
  if (class_index < 0 || class_index >= nugget_class_count(max_length)) {
    throw std::out_of_range("nugget class " + std::to_string(class_index) +
                            " out of range for max length " + std::to_string(max_length));
  }
  if (class_index == 0) return NuggetLabel::nil();
  int length = 1;
  while (length * (length + 1) / 2 < class_index) ++length;
  return {length, class_index - length * (length - 1) / 2};
}

NuggetLabel label_for(const TriggerNugget& trigger, std::size_t char_index) {
  if (char_index < trigger.start || char_index >= trigger.end()) {
    throw std::out_of_range("character " + std::to_string(char_index) + " outside trigger [" +
                            std::to_string(trigger.start) + ", " +
                            std::to_string(trigger.end()) + ")");
  }
  return {static_cast<int>(trigger.length), static_cast<int>(char_index - trigger.start + 1)};
}

}  // namespace npn
