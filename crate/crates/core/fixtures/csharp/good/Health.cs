using System;
using UnityEngine;

namespace Game.Combat
{
    public interface IDamageable
    {
        void TakeDamage(int amount);
    }

    public class Health : MonoBehaviour, IDamageable
    {
        [SerializeField] private int maxHealth = 100;

        public event Action<int, int> Changed;
        public event Action Died;

        public int Current { get; private set; }
        public bool IsDead => Current <= 0;

        private void Awake() => Current = maxHealth;

        public void TakeDamage(int amount)
        {
            if (IsDead) return;
            Current = Mathf.Max(0, Current - amount);
            Changed?.Invoke(Current, maxHealth);
            if (IsDead) Died?.Invoke();
        }

        public void Heal(int amount)
        {
            Current = Mathf.Min(maxHealth, Current + amount);
            Changed?.Invoke(Current, maxHealth);
        }
    }
}
