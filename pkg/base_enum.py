from __future__ import annotations
from enum import Enum


class BaseEnum(Enum):

    def __eq__(self, __value: object) -> bool:
        """
        Python, being an interpreted language,
        has issues when classes are imported from two different locations
        (running a module as __main__ versus importing it).

        As such we define equality to work on the class name and value instead.
        """
        if self.__class__.__name__ == __value.__class__.__name__:
            return self.value == __value.value
        return False

    def __hash__(self) -> int:
        # Must agree with __eq__, members are used as dictionary keys.
        return hash((self.__class__.__name__, self.value))

    @classmethod
    def parse(cls, text: str) -> BaseEnum:
        """
        Look up a member from the lowercase text used in scenario and result files.

        :raises ValueError: when no member matches.
        """
        for member in cls:
            if member.value == text or member.name.lower() == str(text).lower():
                return member
        choices = ", ".join(str(member.value) for member in cls)
        raise ValueError(f"{text!r} is not a valid {cls.__name__} (expected one of: {choices})")
