import abc


class InvalidValueException(Exception):
    pass


class Decorator(abc.ABC):
    """Marks a test function with a single attribute, __<classname>__ = value."""

    def __init__(self, v) -> None:
        res = self.validate(v)
        if res:
            raise InvalidValueException(res)
        self.v = v

    def validate(self, v):
        return None

    def __call__(self, func):
        setattr(func, self.get_attr_name(), self.v)
        return func

    @classmethod
    def get_attr_name(cls):
        return f"__{cls.__name__}__"

    @classmethod
    def value_of(cls, func, default=None):
        return getattr(func, cls.get_attr_name(), default)


class number(Decorator):
    """
    Usage: @number("4.2"), read by run_tests.py to select tests by module.
    """

    def validate(self, v):
        if not isinstance(v, str) or not all(part.isdigit() for part in v.split(".")):
            return "Test number should look like '4.2'."


class slow(Decorator):
    """
    Tests that build full-quantum oracles or long series.
    They are skipped unless run_tests.py is given --slow.
    """

    def __init__(self) -> None:
        self.v = True
