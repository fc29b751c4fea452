"""
词表与三元组定义
实体（物体类别，含person）与关系（动作类别）
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Sequence

from ..utils.errors import VocabError


@dataclass(frozen=True)
class Vocab:
    """物体/动作词表"""
    objects: tuple
    verbs: tuple
    person: str = "person"

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "verbs", tuple(self.verbs))
        if len(self.objects) < 2:
            raise VocabError(f"物体类别数必须 ≥ 2，实际 {len(self.objects)}")
        if len(self.verbs) < 1:
            raise VocabError("动作类别数必须 ≥ 1")
        if len(set(self.objects)) != len(self.objects):
            raise VocabError("物体类别名称存在重复")
        if len(set(self.verbs)) != len(self.verbs):
            raise VocabError("动作类别名称存在重复")
        if self.person not in self.objects:
            raise VocabError(f"词表中缺少person类别 '{self.person}'")

    @property
    def num_objects(self) -> int:
        return len(self.objects)

    @property
    def num_verbs(self) -> int:
        return len(self.verbs)

    @property
    def person_id(self) -> int:
        return self.objects.index(self.person)

    def object_id(self, name: str) -> int:
        try:
            return self.objects.index(name)
        except ValueError:
            raise VocabError(f"未知物体类别: {name}")

    def verb_id(self, name: str) -> int:
        try:
            return self.verbs.index(name)
        except ValueError:
            raise VocabError(f"未知动作类别: {name}")

    def check_object(self, idx: int) -> int:
        if not 0 <= int(idx) < self.num_objects:
            raise VocabError(f"物体ID越界: {idx}")
        return int(idx)

    def check_verb(self, idx: int) -> int:
        if not 0 <= int(idx) < self.num_verbs:
            raise VocabError(f"动作ID越界: {idx}")
        return int(idx)

    def to_dict(self) -> Dict:
        return {"objects": list(self.objects), "verbs": list(self.verbs), "person": self.person}

    @classmethod
    def from_dict(cls, data: Dict) -> "Vocab":
        return cls(tuple(data["objects"]), tuple(data["verbs"]), data.get("person", "person"))


class Triplet(NamedTuple):
    """(头实体, 关系, 尾实体)；头实体恒为person"""
    head: int
    relation: int
    tail: int


def build_pair_triplets(object_label: int, vocab: Vocab) -> List[Triplet]:
    """
    为一个人-物对生成 N 个三元组 (person, r_i, object)

    Args:
        object_label: 物体类别ID（可以是person）
        vocab: 词表

    Returns:
        长度为 N 的三元组列表
    """
    tail = vocab.check_object(object_label)
    head = vocab.person_id
    return [Triplet(head, r, tail) for r in range(vocab.num_verbs)]


class GoldenSet:
    """标注中出现过的三元组集合；其补集为负样本池"""

    def __init__(self, vocab: Vocab, triplets: Iterable[Triplet] = ()):
        self.vocab = vocab
        members = set()
        for t in triplets:
            t = Triplet(*t)
            if t.head != vocab.person_id:
                raise VocabError(f"三元组头实体必须是person: {t}")
            vocab.check_verb(t.relation)
            vocab.check_object(t.tail)
            members.add(t)
        self._members: FrozenSet[Triplet] = frozenset(members)

    def __contains__(self, triplet) -> bool:
        return Triplet(*triplet) in self._members

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self):
        return iter(self.sorted())

    def sorted(self) -> List[Triplet]:
        """按 (head, relation, tail) 排序的成员列表，保证遍历顺序确定"""
        return sorted(self._members)

    def relations_for_tail(self, tail: int) -> FrozenSet[int]:
        return frozenset(t.relation for t in self._members if t.tail == tail)

    def negative_pool_size(self) -> int:
        # 头实体固定为person，全部候选为 M × N
        return self.vocab.num_objects * self.vocab.num_verbs - len(self._members)

    @classmethod
    def from_pairs(cls, vocab: Vocab, pairs: Sequence) -> "GoldenSet":
        """由 (动作ID, 物体ID) 序列构建"""
        return cls(vocab, (Triplet(vocab.person_id, r, t) for r, t in pairs))
