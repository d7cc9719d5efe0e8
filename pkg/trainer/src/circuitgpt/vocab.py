"""Token vocabulary shared with the simulator's serialization format.

Ids are deterministic given the maximum variable count: specials first
(pad is id 0 so padded targets drop out of the masked loss), then
literals, operator names, and the 1024 angle bins.
"""

from dataclasses import dataclass

PAD = "<pad>"
BOS = "<bos>"
END_OF_FORMULA = "<end_of_formula>"
EOS = "<eos>"
NEW_LAYER = "<new_layer_p>"
CLAUSE_SEP = "|"

SPECIALS = [PAD, BOS, END_OF_FORMULA, EOS, NEW_LAYER, CLAUSE_SEP]
ANGLE_BINS = 1024


def operator_names(n: int) -> list[str]:
    names = ["XMIXER"]
    for q in range(1, n + 1):
        names.append(f"X{q}")
        names.append(f"Y{q}")
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            names.append(f"X{i}X{j}")
            names.append(f"Y{i}Y{j}")
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                names.append(f"X{i}Y{j}")
                names.append(f"X{i}Z{j}")
                names.append(f"Y{i}Z{j}")
    return names


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    index: dict
    n_max: int

    @staticmethod
    def build(n_max: int) -> "Vocabulary":
        tokens = list(SPECIALS)
        tokens.extend(f"x{i}" for i in range(1, n_max + 1))
        tokens.extend(f"-x{i}" for i in range(1, n_max + 1))
        tokens.extend(operator_names(n_max))
        tokens.extend(f"a{k}" for k in range(ANGLE_BINS))
        return Vocabulary(
            tokens=tuple(tokens),
            index={tok: i for i, tok in enumerate(tokens)},
            n_max=n_max,
        )

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.index[PAD]

    @property
    def eos_id(self) -> int:
        return self.index[EOS]

    @property
    def end_of_formula_id(self) -> int:
        return self.index[END_OF_FORMULA]

    def encode(self, tokens) -> list[int]:
        try:
            return [self.index[tok] for tok in tokens]
        except KeyError as err:
            raise ValueError(f"token {err.args[0]!r} outside the vocabulary")

    def decode(self, ids) -> list[str]:
        return [self.tokens[i] for i in ids]
