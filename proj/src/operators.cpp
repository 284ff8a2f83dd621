#include "chainscan/operators.hpp"

#include <string>

namespace chainscan {

std::string_view to_string(ElemType t) {
  switch (t) {
    case ElemType::i32: return "i32";
    case ElemType::i64: return "i64";
    case ElemType::f32: return "f32";
    case ElemType::f64: return "f64";
  }
  return "?";
}

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::add: return "add";
    case OpKind::max: return "max";
    case OpKind::min: return "min";
  }
  return "?";
}

ElemType parse_elem_type(std::string_view name) {
  if (name == "i32") return ElemType::i32;
  if (name == "i64") return ElemType::i64;
  if (name == "f32") return ElemType::f32;
  if (name == "f64") return ElemType::f64;
  throw std::invalid_argument("unsupported element type '" + std::string(name) +
                              "' (expected i32, i64, f32 or f64)");
}

OpKind parse_op_kind(std::string_view name) {
  if (name == "add") return OpKind::add;
  if (name == "max") return OpKind::max;
  if (name == "min") return OpKind::min;
  throw std::invalid_argument("unsupported operator '" + std::string(name) +
                              "' (expected add, max or min)");
}

}  // namespace chainscan
