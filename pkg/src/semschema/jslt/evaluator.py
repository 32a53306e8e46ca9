"""Tree-walking evaluator for parsed transformation programs."""

from __future__ import annotations

from .. import jsonmodel
from ..errors import JsltRuntimeError
from . import nodes as N
from .functions import BUILTINS, is_truthy, to_string

MAX_CALL_DEPTH = 500


class Evaluator:
    def __init__(self, functions):
        self.functions = functions
        self.call_depth = 0

    def error(self, node: N.Node, message: str) -> JsltRuntimeError:
        return JsltRuntimeError(message, node.pos[0], node.pos[1])

    def eval(self, node, context, env):
        return _DISPATCH[type(node)](self, node, context, env)

    # -- leaves ----------------------------------------------------------

    def eval_literal(self, node, context, env):
        return node.value

    def eval_context(self, node, context, env):
        return context

    def eval_var(self, node, context, env):
        return env[node.name]

    # -- access, total over any input ------------------------------------

    def eval_key(self, node, context, env):
        target = self.eval(node.target, context, env)
        if isinstance(target, dict):
            return target.get(node.key)
        return None

    def eval_index(self, node, context, env):
        target = self.eval(node.target, context, env)
        index = self.eval(node.index, context, env)
        if target is None or index is None:
            return None
        if isinstance(target, dict):
            if not isinstance(index, str):
                raise self.error(node, "object index must be a string")
            return target.get(index)
        if isinstance(target, (list, str)):
            i = self._as_index(node, index)
            if i < 0:
                i += len(target)
            if 0 <= i < len(target):
                return target[i]
            return None
        raise self.error(node, f"cannot index into {to_string(target)}")

    def eval_slice(self, node, context, env):
        target = self.eval(node.target, context, env)
        if target is None:
            return None
        if not isinstance(target, (list, str)):
            raise self.error(node, f"cannot slice {to_string(target)}")
        low = None if node.low is None else self.eval(node.low, context, env)
        high = None if node.high is None else self.eval(node.high, context, env)
        low = None if low is None else self._as_index(node, low)
        high = None if high is None else self._as_index(node, high)
        return target[low:high]

    def _as_index(self, node, value) -> int:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(node, f"index must be a number, got {to_string(value)}")
        if not jsonmodel.is_integral(value):
            raise self.error(node, f"index must be a whole number, got {to_string(value)}")
        return int(value)

    # -- constructors -----------------------------------------------------

    def eval_array(self, node, context, env):
        return [self.eval(item, context, env) for item in node.items]

    def eval_object(self, node, context, env):
        result = {}
        claimed = set()
        for key_node, value_node in node.pairs:
            key = self.eval(key_node, context, env)
            if not isinstance(key, str):
                raise self.error(key_node, f"object key must be a string, got {to_string(key)}")
            claimed.add(key)
            value = self.eval(value_node, context, env)
            if value is not None:
                result[key] = value
        matcher = node.matcher
        if matcher is not None and isinstance(context, dict):
            skip = claimed.union(matcher.excluded)
            for key, value in context.items():
                if key in skip:
                    continue
                # matched pairs are copied as-is, nulls included
                result[key] = self.eval(matcher.value, value, env)
        return result

    @staticmethod
    def _iter_source(value):
        if isinstance(value, dict):
            return [{"key": k, "value": v} for k, v in value.items()]
        return value

    def eval_array_comp(self, node, context, env):
        source = self.eval(node.source, context, env)
        if source is None:
            return None
        if not isinstance(source, (list, dict)):
            raise self.error(node, f"cannot loop over {to_string(source)}")
        result = []
        for item in self._iter_source(source):
            if node.cond is not None and not is_truthy(self.eval(node.cond, item, env)):
                continue
            result.append(self.eval(node.body, item, env))
        return result

    def eval_object_comp(self, node, context, env):
        source = self.eval(node.source, context, env)
        if source is None:
            return None
        if not isinstance(source, (list, dict)):
            raise self.error(node, f"cannot loop over {to_string(source)}")
        result = {}
        for item in self._iter_source(source):
            if node.cond is not None and not is_truthy(self.eval(node.cond, item, env)):
                continue
            key = self.eval(node.key, item, env)
            if not isinstance(key, str):
                raise self.error(node.key, f"object key must be a string, got {to_string(key)}")
            value = self.eval(node.value, item, env)
            if value is not None:
                result[key] = value
        return result

    # -- control and binding ----------------------------------------------

    def eval_if(self, node, context, env):
        if is_truthy(self.eval(node.cond, context, env)):
            return self.eval(node.then, context, env)
        if node.orelse is not None:
            return self.eval(node.orelse, context, env)
        return None

    def eval_let(self, node, context, env):
        value = self.eval(node.value, context, env)
        return self.eval(node.body, context, {**env, node.name: value})

    def eval_call(self, node, context, env):
        args = [self.eval(arg, context, env) for arg in node.args]
        user = self.functions.get(node.name)
        if user is not None:
            if self.call_depth >= MAX_CALL_DEPTH:
                raise self.error(node, f"call depth exceeds {MAX_CALL_DEPTH}")
            self.call_depth += 1
            try:
                return self.eval(user.body, context, dict(zip(user.params, args)))
            finally:
                self.call_depth -= 1
        builtin = BUILTINS[node.name][2]
        try:
            return builtin(args)
        except JsltRuntimeError as exc:
            if exc.line is None:
                raise self.error(node, str(exc)) from None
            raise

    # -- operators ---------------------------------------------------------

    def eval_binary(self, node, context, env):
        op = node.op
        if op == "and":
            return is_truthy(self.eval(node.left, context, env)) and is_truthy(self.eval(node.right, context, env))
        if op == "or":
            return is_truthy(self.eval(node.left, context, env)) or is_truthy(self.eval(node.right, context, env))
        left = self.eval(node.left, context, env)
        right = self.eval(node.right, context, env)
        if op == "==":
            return jsonmodel.json_equal(left, right)
        if op == "!=":
            return not jsonmodel.json_equal(left, right)
        if op in ("<", "<=", ">", ">="):
            return self._compare(node, op, left, right)
        if op == "+":
            return self._plus(node, left, right)
        if left is None or right is None:
            return None
        if not self._is_number(left) or not self._is_number(right):
            raise self.error(node, f"cannot apply {op!r} to {to_string(left)} and {to_string(right)}")
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right == 0:
            raise self.error(node, "division by zero")
        return left / right

    @staticmethod
    def _is_number(value) -> bool:
        return isinstance(value, (int, float)) and not isinstance(value, bool)

    def _compare(self, node, op, left, right):
        both_numbers = self._is_number(left) and self._is_number(right)
        both_strings = isinstance(left, str) and isinstance(right, str)
        if not (both_numbers or both_strings):
            raise self.error(node, f"cannot order {to_string(left)} and {to_string(right)}")
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right

    def _plus(self, node, left, right):
        if left is None or right is None:
            return None
        if isinstance(left, str) or isinstance(right, str):
            return to_string(left) + to_string(right)
        if self._is_number(left) and self._is_number(right):
            return left + right
        if isinstance(left, list) and isinstance(right, list):
            return left + right
        if isinstance(left, dict) and isinstance(right, dict):
            # left side wins on shared keys
            return {**right, **left}
        raise self.error(node, f"cannot add {to_string(left)} and {to_string(right)}")

    def eval_neg(self, node, context, env):
        value = self.eval(node.operand, context, env)
        if value is None:
            return None
        if not self._is_number(value):
            raise self.error(node, f"cannot negate {to_string(value)}")
        return -value


_DISPATCH = {
    N.Literal: Evaluator.eval_literal,
    N.ContextValue: Evaluator.eval_context,
    N.KeyAccess: Evaluator.eval_key,
    N.IndexAccess: Evaluator.eval_index,
    N.SliceAccess: Evaluator.eval_slice,
    N.ArrayCtor: Evaluator.eval_array,
    N.ObjectCtor: Evaluator.eval_object,
    N.ArrayComp: Evaluator.eval_array_comp,
    N.ObjectComp: Evaluator.eval_object_comp,
    N.If: Evaluator.eval_if,
    N.Let: Evaluator.eval_let,
    N.VarRef: Evaluator.eval_var,
    N.Call: Evaluator.eval_call,
    N.Binary: Evaluator.eval_binary,
    N.UnaryMinus: Evaluator.eval_neg,
}
