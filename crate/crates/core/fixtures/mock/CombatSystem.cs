using System;
using UnityEngine;

// __CLASS__ resolves attacks, hit detection and damage.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private int baseDamage = 10;
    [SerializeField] private float attackRange = 1.2f;
    [SerializeField] private float attackCooldown = 0.4f;
    [SerializeField] private LayerMask targetMask;

    private float cooldownTimer;

    public event Action<GameObject, int> DamageDealt;

    private void Update()
    {
        cooldownTimer -= Time.deltaTime;
        if (Input.GetButtonDown("Fire1"))
        {
            Attack(transform.position, transform.right);
        }
    }

    public int Attack(Vector2 origin, Vector2 direction)
    {
        if (cooldownTimer > 0f)
        {
            return 0;
        }
        cooldownTimer = attackCooldown;
        Collider2D[] hits = Physics2D.OverlapCircleAll(origin + direction * attackRange * 0.5f, attackRange, targetMask);
        int hitCount = 0;
        foreach (Collider2D hit in hits)
        {
            DealDamage(hit.gameObject, baseDamage);
            hitCount++;
        }
        return hitCount;
    }

    public void DealDamage(GameObject target, int amount)
    {
        target.SendMessage("TakeDamage", amount, SendMessageOptions.DontRequireReceiver);
        DamageDealt?.Invoke(target, amount);
    }

    public bool IsReady()
    {
        return cooldownTimer <= 0f;
    }
}
