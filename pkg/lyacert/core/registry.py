"""
Name registries for lyacert.

Environments and trainers are looked up by the names used in RunConfig
(``pendulum``, ``quadrotor``, ``lsac``, ...), which keeps the CLI free of
if/else dispatch and lets tests register their own factories.
"""

import logging
from typing import Any, Callable, Dict, Generic, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


class Registry(Generic[T]):
    """
    Mapping from names to factories.

    Args:
        kind: Human-readable name of what is registered, used in errors
    """

    def __init__(self, kind: str) -> None:
        self.kind = kind
        self._entries: Dict[str, Callable[..., T]] = {}

    def register(self, name: str, factory: Callable[..., T]) -> Callable[..., T]:
        """
        Register a factory under the given name.

        Args:
            name (str): The name to register the factory under
            factory: Callable producing the registered object

        Returns:
            The factory, so this can be used as a decorator helper

        Raises:
            ValueError: If name is empty
            TypeError: If factory is not callable
        """
        if not name or not isinstance(name, str):
            raise ValueError("Name must be a non-empty string")
        if not callable(factory):
            raise TypeError(f"factory must be callable, got {type(factory)}")

        if name in self._entries:
            logger.warning(f"Overriding existing {self.kind} registration for '{name}'")

        self._entries[name] = factory
        logger.debug(f"Registered {self.kind} '{name}' -> {getattr(factory, '__name__', factory)}")
        return factory

    def get(self, name: str) -> Callable[..., T]:
        """
        Get a factory by name.

        Raises:
            KeyError: If the name is not registered
        """
        if name not in self._entries:
            raise KeyError(
                f"{self.kind} '{name}' not registered. Available: {self.names()}"
            )
        return self._entries[name]

    def create(self, name: str, *args: Any, **kwargs: Any) -> T:
        """Look up a factory and call it."""
        factory = self.get(name)
        try:
            return factory(*args, **kwargs)
        except Exception as e:
            logger.error(f"Failed to create {self.kind} '{name}': {e}")
            raise

    def unregister(self, name: str) -> Callable[..., T]:
        """Remove and return a registration."""
        if name not in self._entries:
            raise KeyError(f"{self.kind} '{name}' not registered. Available: {self.names()}")
        return self._entries.pop(name)

    def names(self) -> List[str]:
        """Get the registered names in sorted order."""
        return sorted(self._entries)

    def is_registered(self, name: str) -> bool:
        return name in self._entries

    def __contains__(self, name: object) -> bool:
        return name in self._entries
